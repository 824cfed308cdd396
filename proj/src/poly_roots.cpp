#include "hhlab/poly_roots.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "hhlab/errors.hpp"

namespace hhlab {
namespace {

// Parlett–Reinsch balancing restricted to powers of two, so the scaling
// itself introduces no rounding.
void balance(Eigen::MatrixXd& a) {
  const Eigen::Index dim = a.rows();
  constexpr double kGamma = 0.95;
  bool changed = true;
  while (changed) {
    changed = false;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double row = a.row(i).lpNorm<1>() - std::abs(a(i, i));
      const double col = a.col(i).lpNorm<1>() - std::abs(a(i, i));
      if (row == 0.0 || col == 0.0) continue;
      int exponent = 0;
      std::frexp(row / col, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double new_col = std::ldexp(col, exponent);
      const double new_row = std::ldexp(row, -exponent);
      if (new_col + new_row < kGamma * (col + row)) {
        a.row(i) *= std::ldexp(1.0, -exponent);
        a.col(i) *= std::ldexp(1.0, exponent);
        changed = true;
      }
    }
  }
}

}  // namespace

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
  if (coeffs.empty() || coeffs.front() == 0.0) {
    throw InvalidArgument("polynomial_roots: leading coefficient must be nonzero");
  }
  const auto degree = static_cast<Eigen::Index>(coeffs.size() - 1);
  if (degree == 0) return {};
  if (degree == 1) return {std::complex<double>(-coeffs[1] / coeffs[0], 0.0)};

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  companion.diagonal(-1).setOnes();
  for (Eigen::Index k = 0; k < degree; ++k) {
    // last column holds -c_{d-k}/c_0 in row k
    companion(k, degree - 1) = -coeffs[static_cast<std::size_t>(degree - k)] / coeffs[0];
  }
  balance(companion);

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("polynomial_roots: eigenvalue iteration did not converge");
  }
  const Eigen::VectorXcd ev = solver.eigenvalues();
  std::vector<std::complex<double>> roots(ev.data(), ev.data() + ev.size());
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

std::vector<double> polynomial_from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& root : roots) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i] += poly[i];
      next[i + 1] -= poly[i] * root;
    }
    poly = std::move(next);
  }
  std::vector<double> out(poly.size());
  std::transform(poly.begin(), poly.end(), out.begin(), [](auto z) { return z.real(); });
  return out;
}

}  // namespace hhlab
