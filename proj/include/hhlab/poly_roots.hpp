#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hhlab {

/// Roots of c[0] x^d + c[1] x^{d-1} + ... + c[d], computed as eigenvalues of
/// the balanced companion matrix. Throws InvalidArgument if c[0] == 0.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

/// Coefficients (leading first, monic) of Π (x - root_i), real parts only.
std::vector<double> polynomial_from_roots(std::span<const std::complex<double>> roots);

}  // namespace hhlab
