#pragma once

// Naive reference implementations used as independent oracles.

#include <array>
#include <cmath>

#include "mfg/grid.hpp"

namespace oracle {

inline double upwind_norm_pow(double beta, double q1, double q2, double q3, double q4) {
  const double a = q1 < 0 ? -q1 : 0.0, b = q2 > 0 ? q2 : 0.0, c = q3 < 0 ? -q3 : 0.0,
               d = q4 > 0 ? q4 : 0.0;
  return std::pow(a * a + b * b + c * c + d * d, beta / 2.0);
}

/// g at node (i, j), written out from the one-sided differences.
inline double g_at(const mfg::GridField& calh, double beta, const mfg::GridField& u, int i, int j) {
  const double h = u.grid().h();
  const double q1 = (u(i + 1, j) - u(i, j)) / h, q2 = (u(i, j) - u(i - 1, j)) / h;
  const double q3 = (u(i, j + 1) - u(i, j)) / h, q4 = (u(i, j) - u(i, j - 1)) / h;
  return calh(i, j) + upwind_norm_pow(beta, q1, q2, q3, q4);
}

inline double lap_at(const mfg::GridField& u, int i, int j) {
  const double h = u.grid().h();
  return (u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1) - 4.0 * u(i, j)) / (h * h);
}

/// (u_next - u_cur)/dt - nu Lap u_next + g - phi.
inline mfg::GridField bellman_residual(const mfg::GridField& calh, double beta, double nu, double dt,
                                       const mfg::GridField& u_next, const mfg::GridField& u_cur,
                                       const mfg::GridField& phi) {
  mfg::GridField r(u_next.grid());
  const int n = u_next.grid().n_side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r(i, j) = (u_next(i, j) - u_cur(i, j)) / dt - nu * lap_at(u_next, i, j) +
                g_at(calh, beta, u_next, i, j) - phi(i, j);
  return r;
}

/// g_q at node (i, j): (-G_p1, G_p2, -G_p3, G_p4) with G_p = beta |p|^(beta-2) p.
inline std::array<double, 4> gq_at(double beta, const mfg::GridField& u, int i, int j) {
  const double h = u.grid().h();
  const double q[4] = {(u(i + 1, j) - u(i, j)) / h, (u(i, j) - u(i - 1, j)) / h,
                       (u(i, j + 1) - u(i, j)) / h, (u(i, j) - u(i, j - 1)) / h};
  const double p[4] = {q[0] < 0 ? -q[0] : 0.0, q[1] > 0 ? q[1] : 0.0, q[2] < 0 ? -q[2] : 0.0,
                       q[3] > 0 ? q[3] : 0.0};
  const double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
  const double w = r > 0 ? beta * std::pow(r, beta - 2.0) : 0.0;
  return {-w * p[0], w * p[1], -w * p[2], w * p[3]};
}

/// T(u, m) = -B^T m, where (B v)_x = g_q(x) . [D_h v]_x, assembled entry by entry.
inline mfg::GridField transport(double beta, const mfg::GridField& u, const mfg::GridField& m) {
  const auto& g = u.grid();
  const int n = g.n_side();
  const double h = g.h();
  mfg::GridField t(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto a = gq_at(beta, u, i, j);
      const double mx = m(i, j);
      // Row (i, j) of B touches (i+1,j), (i,j), (i-1,j), (i,j+1), (i,j-1).
      t(i + 1, j) -= mx * a[0] / h;
      t(i, j) -= mx * (-a[0] + a[1] - a[2] + a[3]) / h;
      t(i - 1, j) -= mx * (-a[1]) / h;
      t(i, j + 1) -= mx * a[2] / h;
      t(i, j - 1) -= mx * (-a[3]) / h;
    }
  return t;
}

/// (m_next - m_cur)/dt + nu Lap m_cur + T(u_next, m_cur).
inline mfg::GridField fp_residual(double beta, double nu, double dt, const mfg::GridField& u_next,
                                  const mfg::GridField& m_next, const mfg::GridField& m_cur) {
  mfg::GridField r = transport(beta, u_next, m_cur);
  const int n = r.grid().n_side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r(i, j) += (m_next(i, j) - m_cur(i, j)) / dt + nu * lap_at(m_cur, i, j);
  return r;
}

}  // namespace oracle
