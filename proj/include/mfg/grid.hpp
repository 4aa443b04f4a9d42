#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mfg {

/// Uniform N x N grid on the unit torus, step h = 1/N.
/// Indices are periodic: (i, j) resolves to (i mod N, j mod N).
class TorusGrid {
public:
  explicit TorusGrid(int n_side);

  int n_side() const { return n_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  int wrap(int i) const {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }
  /// Lexicographic offset of the wrapped pair, i-major.
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(wrap(i)) * n_ + wrap(j);
  }
  double coord(int i) const { return wrap(i) * h_; }

  bool operator==(const TorusGrid& other) const { return n_ == other.n_; }

private:
  int n_;
  double h_;
};

class GridField {
public:
  explicit GridField(const TorusGrid& grid, double fill = 0.0);
  GridField(const TorusGrid& grid, std::vector<double> values);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(double a);

  double min() const;
  double max() const;
  /// Plain sum in lexicographic order.
  double sum() const;
  /// h^2 * sum.
  double mass() const;

private:
  TorusGrid grid_;
  std::vector<double> values_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(double s, GridField a);

struct TimeMesh {
  TimeMesh(double horizon, int n_steps);

  double horizon;
  int n_steps;
  double dt;

  double time(int n) const { return n * dt; }
};

/// N_T + 1 slices on one grid; slice n holds values at t_n.
class SpaceTimeField {
public:
  SpaceTimeField(const TorusGrid& grid, const TimeMesh& mesh, double fill = 0.0);
  SpaceTimeField(const TimeMesh& mesh, std::vector<GridField> slices);

  const TorusGrid& grid() const { return slices_.front().grid(); }
  const TimeMesh& mesh() const { return mesh_; }
  int n_steps() const { return mesh_.n_steps; }

  const GridField& operator[](int n) const { return slices_[static_cast<std::size_t>(n)]; }
  GridField& operator[](int n) { return slices_[static_cast<std::size_t>(n)]; }

  auto begin() const { return slices_.begin(); }
  auto end() const { return slices_.end(); }

private:
  TimeMesh mesh_;
  std::vector<GridField> slices_;
};

using Quad = std::array<double, 4>;

/// [D_h u] at every node.
class FourVectorField {
public:
  explicit FourVectorField(const TorusGrid& grid) : grid_(grid), values_(grid.size()) {}

  const TorusGrid& grid() const { return grid_; }
  const Quad& operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  Quad& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  const Quad& operator[](std::size_t k) const { return values_[k]; }
  Quad& operator[](std::size_t k) { return values_[k]; }

private:
  TorusGrid grid_;
  std::vector<Quad> values_;
};

void require_same_grid(const TorusGrid& a, const TorusGrid& b);
void require_same_grid(const GridField& a, const GridField& b);

GridField d1_plus(const GridField& u);
GridField d2_plus(const GridField& u);

/// ((D1+ u)_{i,j}, (D1+ u)_{i-1,j}, (D2+ u)_{i,j}, (D2+ u)_{i,j-1}) at node (i, j).
Quad stencil_at(const GridField& u, int i, int j);
FourVectorField dh_stencil(const GridField& u);

/// Five-point Laplacian, -(4u - sum of neighbours)/h^2.
GridField laplace5(const GridField& u);

using DensitySampler = std::function<double(double, double)>;

/// Mean of m over the h x h cell centred at each node (3x3 Gauss-Legendre per cell).
GridField cell_average(const DensitySampler& m, const TorusGrid& grid);
GridField sample_nodes(const DensitySampler& f, const TorusGrid& grid);

// Inner products and norms. inner2 is the unweighted sum; everything else
// carries the h^2 (and dt, for space-time) quadrature weight.
double inner2(const GridField& u, const GridField& v);
double norm_sup(const GridField& u);
double norm_l1(const GridField& u);
double norm_l2(const GridField& u);
double norm_lp(const GridField& u, double p);
/// (h^2 sum |[D_h u]|^beta)^(1/beta), |.| the Euclidean norm of the 4-vector.
double seminorm_w1(const GridField& u, double beta);

double norm_sup(const SpaceTimeField& u);
/// (h^2 dt sum_{n=first..last} sum |u^n|^p)^(1/p).
double norm_lp(const SpaceTimeField& u, double p, int first, int last);
/// (h^2 dt sum_{n=1..N_T} sum |[D_h u^n]|^beta)^(1/beta).
double seminorm_lbeta_w1(const SpaceTimeField& u, double beta);

/// Tensor-product linear interpolation with periodic wrap.
double bilinear_interp(const GridField& u, double x1, double x2);
/// Bilinear in space, linear in t between neighbouring slices.
double trilinear_interp(const SpaceTimeField& u, double t, double x1, double x2);

/// Injection onto a coarser nested grid.
GridField restrict_to(const GridField& fine, const TorusGrid& coarse);

}  // namespace mfg
