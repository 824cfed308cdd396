#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library beyond plain data types.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <algorithm>

namespace oracle {

// Π (μ - r_i), leading coefficient first, by repeated multiplication.
inline std::array<double, 5> monic_from_roots(const std::array<double, 4>& r) {
  std::array<double, 5> c{1.0, 0.0, 0.0, 0.0, 0.0};
  int deg = 0;
  for (double root : r) {
    for (int k = deg + 1; k >= 1; --k) c[k] -= root * c[k - 1];
    ++deg;
  }
  return c;
}

// w = e^{μt} solves the linear radial operator iff u = r^{μ-B} is biharmonic,
// so the characteristic polynomial at w = 0 has roots B, B+2, B-(n-2), B-(n-4).
inline std::array<double, 4> kernel_roots(double B, int n) { return {B, B + 2.0, B - (n - 2.0), B - (n - 4.0)}; }

struct Coeffs {
  double B, a0, a1, a2, a3;
};

inline Coeffs coefficients(int n, double alpha, double p) {
  const double B = (4.0 + alpha) / (p - 1.0);
  const auto c = monic_from_roots(kernel_roots(B, n));
  return {B, c[4], c[3], c[2], c[1]};
}

// |S^{k}| by the two-step recursion |S^k| = 2π/(k-1) |S^{k-2}|.
inline double sphere(int dim_minus_one) {
  const int k = dim_minus_one;
  if (k == 0) return 2.0;
  if (k == 1) return 2.0 * std::numbers::pi;
  return 2.0 * std::numbers::pi / (k - 1) * sphere(k - 2);
}

// Composite Simpson with N (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int N = 2000) {
  const double h = (b - a) / N;
  double s = f(a) + f(b);
  for (int i = 1; i < N; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Fourth-order centered differences for the first and second derivative.
inline double d1(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
inline double d2(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

// -Δu for radial u by finite differences in r.
inline double neg_laplacian_fd(const std::function<double(double)>& u, double r, int n, double h = 1e-3) {
  return -(d2(u, r, h) + (n - 1.0) / r * d1(u, r, h));
}

// Classical RK4 on w'''' + a3w''' + a2w'' + a1w' + a0w = w^p.
inline std::array<double, 4> rk4(std::array<double, 4> y, double t0, double t1, int steps, const Coeffs& c,
                                 double p) {
  auto f = [&](const std::array<double, 4>& s) {
    return std::array<double, 4>{s[1], s[2], s[3],
                                 std::pow(s[0], p) - c.a3 * s[3] - c.a2 * s[2] - c.a1 * s[1] - c.a0 * s[0]};
  };
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    std::array<double, 4> k1 = f(y), y2, y3, y4;
    for (int j = 0; j < 4; ++j) y2[j] = y[j] + 0.5 * h * k1[j];
    auto k2 = f(y2);
    for (int j = 0; j < 4; ++j) y3[j] = y[j] + 0.5 * h * k2[j];
    auto k3 = f(y3);
    for (int j = 0; j < 4; ++j) y4[j] = y[j] + h * k3[j];
    auto k4 = f(y4);
    for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return y;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace oracle
