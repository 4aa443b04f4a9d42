#pragma once

#include <array>
#include <optional>

#include "mfg/grid.hpp"

namespace mfg {

using Mat4 = std::array<std::array<double, 4>, 4>;

/// Upwind part p = (q1^-, q2^+, q3^-, q4^+) of a stencil vector q.
Quad upwind_part(const Quad& q);

double euclid(const Quad& p);
double max_abs(const Quad& p);

/// G(p) = |p|^beta and its derivatives on the closed positive orthant.
struct PowerLaw {
  double beta;

  double value(const Quad& p) const;
  /// beta |p|^(beta-2) p, continuously extended by 0 at p = 0.
  Quad grad(const Quad& p) const;
  /// beta |p|^(beta-2) I + beta (beta-2) |p|^(beta-4) p p^T; requires p != 0.
  Mat4 hessian(const Quad& p) const;
};

/// Numerical Hamiltonian g(x, q) = calH(x) + G(upwind_part(q)) for H(x, p) = calH(x) + |p|^beta.
class PowerHamiltonian {
public:
  PowerHamiltonian(double beta, GridField calh, std::optional<double> calh_grad_bound = {});

  double beta() const { return law_.beta; }
  const PowerLaw& law() const { return law_; }
  const GridField& calh() const { return calh_; }
  const TorusGrid& grid() const { return calh_.grid(); }
  std::optional<double> calh_grad_bound() const { return calh_grad_bound_; }

  /// g at lexicographic node index `node`.
  double value(std::size_t node, const Quad& q) const;
  /// dg/dq. Slots 1, 3 carry -G_p on the negative side, slots 2, 4 +G_p on the positive side.
  Quad grad(const Quad& q) const;
  /// g(x, qt) - g(x, q) - g_q(x, q).(qt - q); nonnegative by convexity.
  double bregman_gap(const Quad& q, const Quad& qt) const;

private:
  PowerLaw law_;
  GridField calh_;
  std::optional<double> calh_grad_bound_;
};

/// g(x_{i,j}, [D_h u]_{i,j}) at every node.
GridField hamiltonian_field(const PowerHamiltonian& H, const GridField& u);

/// sum_{n=1}^{N_T} sum_{i,j} m^{n-1}_{i,j} * bregman_gap([D_h u^n], [D_h ut^n]), unweighted.
double functional_G(const PowerHamiltonian& H, const SpaceTimeField& m, const SpaceTimeField& u,
                    const SpaceTimeField& ut);

}  // namespace mfg
