#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mfg/grid.hpp"

namespace mfg {

/// Grid function in K_h: nonnegative with h^2-weighted mass 1.
class DiscreteDensity {
public:
  /// Throws UsageError unless min >= 0 and |mass - 1| <= mass_tol.
  explicit DiscreteDensity(GridField m, double mass_tol = 1e-12);

  const GridField& field() const { return m_; }
  operator const GridField&() const { return m_; }

private:
  GridField m_;
};

/// Scales a nonnegative field to unit mass; throws on negative entries or zero mass.
GridField normalize_density(GridField m);

/// Local coupling F(m) with the constants of its growth and monotonicity conditions:
///   m F(m) >= delta |F(m)|^gamma - c1,   F'(m) >= delta min(m^eta1, m^-eta2).
struct LocalCost {
  std::string preset;
  double alpha = 1.0;
  std::function<double(double)> f;
  std::function<double(double)> f_prime;
  double delta = 1.0;
  double gamma = 2.0;
  double c1 = 0.0;
  double eta1 = 1.0;
  double eta2 = 0.5;

  static LocalCost linear();
  /// F(m) = m^alpha, alpha in (0, 2].
  static LocalCost power(double alpha);
};

struct LocalCostCheck {
  double growth_worst_margin;     // m F - (delta |F|^gamma - c1), relative
  double derivative_worst_margin; // F' - delta min(m^eta1, m^-eta2), relative
  bool pass;
};

/// Samples both conditions on [0, upper].
LocalCostCheck check_local_cost(const LocalCost& cost, int samples = 2000, double upper = 1e3);

/// m -> w solving (Delta_h^2 + I) w = m on the periodic grid, diagonalised by the DFT.
class BilaplacianResolvent {
public:
  explicit BilaplacianResolvent(const TorusGrid& grid);
  ~BilaplacianResolvent();
  BilaplacianResolvent(const BilaplacianResolvent&) = delete;
  BilaplacianResolvent& operator=(const BilaplacianResolvent&) = delete;

  GridField apply(const GridField& m) const;
  const TorusGrid& grid() const { return grid_; }
  /// Eigenvalue of -Delta_h for wavenumber (k1, k2).
  static double laplace_symbol(int k1, int k2, const TorusGrid& grid);

private:
  struct Plans;
  TorusGrid grid_;
  std::vector<double> inv_symbol_;
  std::unique_ptr<Plans> plans_;
};

/// The coupling Phi_h, either local or the bilaplacian smoothing operator.
class CostOperator {
public:
  enum class Kind { local, bilaplacian };

  static CostOperator local(LocalCost cost);
  static CostOperator bilaplacian();

  Kind kind() const { return kind_; }
  bool is_local() const { return kind_ == Kind::local; }
  const LocalCost& local_cost() const;
  std::string describe() const;

  /// Phi_h[m] with no K_h gate; local costs clamp m at 0 first.
  GridField apply(const GridField& m) const;

private:
  CostOperator() = default;
  const BilaplacianResolvent& resolvent(const TorusGrid& grid) const;

  Kind kind_ = Kind::local;
  std::shared_ptr<LocalCost> local_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// Phi_h[m] after the loose K_h gate (mass within 1e-8, no entry below -1e-10).
GridField eval_cost(const CostOperator& cost, const GridField& m);

/// (Phi_h[m] - Phi_h[mt], m - mt)_2.
double monotone_pairing(const CostOperator& cost, const GridField& m, const GridField& mt);

struct PhiH3Level {
  int n_side;
  double sup_norm;
  double lipschitz;
};

struct PhiH3Report {
  std::vector<PhiH3Level> levels;
  double bound;
  double max_sup;
  double max_lipschitz;
  bool pass;
};

/// Max over sampled m in K_h (random fields plus a one-cell spike) of ||Phi_h[m]||_inf and
/// of the torus Lipschitz quotient of Phi_h[m], per level; passes when every level stays
/// below `bound`.
PhiH3Report phi_h3_check(const CostOperator& cost, const std::vector<int>& levels, int samples,
                         std::uint64_t seed, double bound);

/// Exact Phi[m] for a trigonometric polynomial m = sum a cos(2 pi k.x) + b sin(2 pi k.x).
struct FourierMode {
  int k1, k2;
  double a_cos, b_sin;
};
double bilaplacian_resolvent_exact(const std::vector<FourierMode>& modes, double x1, double x2);
double fourier_series(const std::vector<FourierMode>& modes, double x1, double x2);

}  // namespace mfg
