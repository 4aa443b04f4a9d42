#include "mfg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfg/errors.hpp"

namespace mfg {

TorusGrid::TorusGrid(int n_side) : n_(n_side), h_(1.0 / n_side) {
  if (n_side < 2) throw UsageError("TorusGrid: n_side must be at least 2");
}

GridField::GridField(const TorusGrid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

GridField::GridField(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    throw UsageError("GridField: value count does not match grid");
}

GridField& GridField::operator+=(const GridField& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  require_same_grid(*this, o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

GridField& GridField::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

double GridField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridField::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double GridField::mass() const { return grid_.h() * grid_.h() * sum(); }

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(double s, GridField a) { return a *= s; }

TimeMesh::TimeMesh(double T, int steps) : horizon(T), n_steps(steps), dt(T / steps) {
  if (!(T > 0.0)) throw UsageError("TimeMesh: horizon must be positive");
  if (steps < 1) throw UsageError("TimeMesh: n_steps must be positive");
}

SpaceTimeField::SpaceTimeField(const TorusGrid& grid, const TimeMesh& mesh, double fill)
    : mesh_(mesh), slices_(static_cast<std::size_t>(mesh.n_steps) + 1, GridField(grid, fill)) {}

SpaceTimeField::SpaceTimeField(const TimeMesh& mesh, std::vector<GridField> slices)
    : mesh_(mesh), slices_(std::move(slices)) {
  if (slices_.size() != static_cast<std::size_t>(mesh_.n_steps) + 1)
    throw UsageError("SpaceTimeField: need n_steps + 1 slices");
  for (const auto& s : slices_) require_same_grid(s.grid(), slices_.front().grid());
}

void require_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b))
    throw UsageError("grid mismatch: " + std::to_string(a.n_side()) + " vs " +
                     std::to_string(b.n_side()));
}

void require_same_grid(const GridField& a, const GridField& b) {
  require_same_grid(a.grid(), b.grid());
}

GridField d1_plus(const GridField& u) {
  const auto& g = u.grid();
  const int n = g.n_side();
  GridField out(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = (u(i + 1, j) - u(i, j)) / g.h();
  return out;
}

GridField d2_plus(const GridField& u) {
  const auto& g = u.grid();
  const int n = g.n_side();
  GridField out(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = (u(i, j + 1) - u(i, j)) / g.h();
  return out;
}

Quad stencil_at(const GridField& u, int i, int j) {
  const double inv_h = 1.0 / u.grid().h();
  const double c = u(i, j);
  return {(u(i + 1, j) - c) * inv_h, (c - u(i - 1, j)) * inv_h, (u(i, j + 1) - c) * inv_h,
          (c - u(i, j - 1)) * inv_h};
}

FourVectorField dh_stencil(const GridField& u) {
  const auto& g = u.grid();
  FourVectorField out(g);
  for (int i = 0; i < g.n_side(); ++i)
    for (int j = 0; j < g.n_side(); ++j) out(i, j) = stencil_at(u, i, j);
  return out;
}

GridField laplace5(const GridField& u) {
  const auto& g = u.grid();
  const int n = g.n_side();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  GridField out(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) =
          -(4.0 * u(i, j) - u(i + 1, j) - u(i - 1, j) - u(i, j + 1) - u(i, j - 1)) * inv_h2;
  return out;
}

GridField cell_average(const DensitySampler& m, const TorusGrid& grid) {
  // Gauss-Legendre nodes/weights on [-1/2, 1/2].
  static const double r = 0.5 * std::sqrt(0.6);
  static const std::array<double, 3> xi{-r, 0.0, r};
  static const std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const double h = grid.h();
  GridField out(grid);
  for (int i = 0; i < grid.n_side(); ++i)
    for (int j = 0; j < grid.n_side(); ++j) {
      double acc = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          acc += w[a] * w[b] * m(i * h + xi[a] * h, j * h + xi[b] * h);
      out(i, j) = acc;
    }
  return out;
}

GridField sample_nodes(const DensitySampler& f, const TorusGrid& grid) {
  GridField out(grid);
  for (int i = 0; i < grid.n_side(); ++i)
    for (int j = 0; j < grid.n_side(); ++j) out(i, j) = f(i * grid.h(), j * grid.h());
  return out;
}

double inner2(const GridField& u, const GridField& v) {
  require_same_grid(u, v);
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
  return s;
}

double norm_sup(const GridField& u) {
  double s = 0.0;
  for (double v : u.values()) s = std::max(s, std::abs(v));
  return s;
}

double norm_l1(const GridField& u) { return norm_lp(u, 1.0); }
double norm_l2(const GridField& u) { return norm_lp(u, 2.0); }

double norm_lp(const GridField& u, double p) {
  double s = 0.0;
  for (double v : u.values()) s += std::pow(std::abs(v), p);
  const double h = u.grid().h();
  return std::pow(h * h * s, 1.0 / p);
}

static double quad_norm(const Quad& q) {
  return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
}

static double w1_sum(const GridField& u, double beta) {
  const auto& g = u.grid();
  double s = 0.0;
  for (int i = 0; i < g.n_side(); ++i)
    for (int j = 0; j < g.n_side(); ++j) s += std::pow(quad_norm(stencil_at(u, i, j)), beta);
  return s;
}

double seminorm_w1(const GridField& u, double beta) {
  const double h = u.grid().h();
  return std::pow(h * h * w1_sum(u, beta), 1.0 / beta);
}

double norm_sup(const SpaceTimeField& u) {
  double s = 0.0;
  for (const auto& slice : u) s = std::max(s, norm_sup(slice));
  return s;
}

double norm_lp(const SpaceTimeField& u, double p, int first, int last) {
  const double h = u.grid().h();
  double s = 0.0;
  for (int n = first; n <= last; ++n)
    for (double v : u[n].values()) s += std::pow(std::abs(v), p);
  return std::pow(h * h * u.mesh().dt * s, 1.0 / p);
}

double seminorm_lbeta_w1(const SpaceTimeField& u, double beta) {
  const double h = u.grid().h();
  double s = 0.0;
  for (int n = 1; n <= u.n_steps(); ++n) s += w1_sum(u[n], beta);
  return std::pow(h * h * u.mesh().dt * s, 1.0 / beta);
}

double bilinear_interp(const GridField& u, double x1, double x2) {
  const auto& g = u.grid();
  const double s1 = x1 / g.h();
  const double s2 = x2 / g.h();
  const double f1 = std::floor(s1);
  const double f2 = std::floor(s2);
  const double a = s1 - f1;
  const double b = s2 - f2;
  // Reduce the base index modulo n before converting, so huge coordinates stay exact.
  const int i = g.wrap(static_cast<int>(std::fmod(f1, g.n_side())));
  const int j = g.wrap(static_cast<int>(std::fmod(f2, g.n_side())));
  return (1 - a) * (1 - b) * u(i, j) + a * (1 - b) * u(i + 1, j) + (1 - a) * b * u(i, j + 1) +
         a * b * u(i + 1, j + 1);
}

double trilinear_interp(const SpaceTimeField& u, double t, double x1, double x2) {
  const auto& mesh = u.mesh();
  const double s = std::clamp(t / mesh.dt, 0.0, static_cast<double>(mesh.n_steps));
  int n = static_cast<int>(std::floor(s));
  if (n >= mesh.n_steps) n = mesh.n_steps - 1;
  const double w = s - n;
  return (1 - w) * bilinear_interp(u[n], x1, x2) + w * bilinear_interp(u[n + 1], x1, x2);
}

GridField restrict_to(const GridField& fine, const TorusGrid& coarse) {
  const int nf = fine.grid().n_side();
  const int nc = coarse.n_side();
  if (nf % nc != 0)
    throw UsageError("restrict: grids are not nested (" + std::to_string(nf) + " onto " +
                     std::to_string(nc) + ")");
  const int ratio = nf / nc;
  GridField out(coarse);
  for (int i = 0; i < nc; ++i)
    for (int j = 0; j < nc; ++j) out(i, j) = fine(ratio * i, ratio * j);
  return out;
}

}  // namespace mfg
