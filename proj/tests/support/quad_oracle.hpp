#pragma once

// Test-only quadrature oracle, independent of the production integration
// path: plain adaptive Simpson on the raw 2d-dimensional block-pair
// integral, no triangular-density reduction and no Gauss-Legendre nodes.

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lrp::testing {

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Same block-pair integral evaluated on the d-dimensional form with the
// triangular coordinate-difference density, again by nested adaptive
// Simpson. Independent of the production Gauss-Legendre path; the raw
// 2d-dimensional oracle below validates the reduction itself.
inline double reduced_block_pair_oracle(std::span<const std::int32_t> w, double tol) {
  const int d = static_cast<int>(w.size());
  std::vector<double> z(static_cast<std::size_t>(d));

  std::function<double(int)> level = [&](int k) -> double {
    if (k == d) {
      double sq = 0.0;
      double weight = 1.0;
      for (int i = 0; i < d; ++i) {
        const double u = static_cast<double>(w[static_cast<std::size_t>(i)]) +
                         z[static_cast<std::size_t>(i)];
        sq += u * u;
        weight *= 1.0 - std::abs(z[static_cast<std::size_t>(i)]);
      }
      double denom = 1.0;
      for (int i = 0; i < d; ++i) denom *= sq;
      return weight / denom;
    }
    // Split at the kink of the triangular weight.
    const double child_tol = tol / std::pow(8.0, d - 1 - k);
    return adaptive_simpson(
               [&](double t) {
                 z[static_cast<std::size_t>(k)] = t;
                 return level(k + 1);
               },
               -1.0, 0.0, 0.5 * child_tol) +
           adaptive_simpson(
               [&](double t) {
                 z[static_cast<std::size_t>(k)] = t;
                 return level(k + 1);
               },
               0.0, 1.0, 0.5 * child_tol);
  };
  return level(0);
}

// Integral of |x - y|^(-2d) for x over w + [0,1]^d and y over [0,1]^d,
// evaluated as 2d nested adaptive Simpson passes. Only valid away from the
// nearest-neighbor divergence (||w||_inf >= 2).
inline double block_pair_integral_oracle(std::span<const std::int32_t> w, double tol) {
  const int d = static_cast<int>(w.size());
  const int vars = 2 * d;
  std::vector<double> point(static_cast<std::size_t>(vars));

  std::function<double(int)> level = [&](int k) -> double {
    if (k == vars) {
      double sq = 0.0;
      for (int i = 0; i < d; ++i) {
        const double x = static_cast<double>(w[static_cast<std::size_t>(i)]) +
                         point[static_cast<std::size_t>(i)];
        const double y = point[static_cast<std::size_t>(d + i)];
        const double u = x - y;
        sq += u * u;
      }
      double denom = 1.0;
      for (int i = 0; i < d; ++i) denom *= sq;
      return 1.0 / denom;
    }
    return adaptive_simpson(
        [&](double t) {
          point[static_cast<std::size_t>(k)] = t;
          return level(k + 1);
        },
        0.0, 1.0, tol / std::pow(4.0, vars - 1 - k));
  };
  return level(0);
}

}  // namespace lrp::testing
