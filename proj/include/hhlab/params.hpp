#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace hhlab {

/// Parameters of  (-Δ)^m u = |x|^α u^p  in the punctured unit ball of R^n.
/// Only m = 2 is accepted by the coefficient and dynamics code; the exponent
/// formulas accept any m >= 1.
struct ProblemParams {
  int n = 6;
  double alpha = 0.0;
  double p = 4.0;
  int m = 2;

  friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

/// Throws InvalidArgument unless n > 2m, α > -2m, p > 1 and m >= 1.
void validate(const ProblemParams& params);

struct ExponentSet {
  double serrin;           // (n+α)/(n-2m)
  double hardy_sobolev;    // (n+2m+2α)/(n-2m)
  double sobolev;          // (n+2m)/(n-2m)
  double dichotomy_upper;  // (n+2m+α)/(n-2m)
};

ExponentSet critical_exponents(const ProblemParams& params);

/// Coefficients of the autonomous fourth-order ODE satisfied by
/// w(t) = r^B u(r), t = ln r, with B = (4+α)/(p-1):
///   w'''' + a3 w''' + a2 w'' + a1 w' + a0 w = w^p.
/// a4 multiplies Δ_θ w in the full equation and is unused radially.
struct CoefficientSet {
  double B;
  double a0;
  double a1;
  double a2;
  double a3;
  double a4;
};

CoefficientSet coefficients(const ProblemParams& params);

/// B(B+2)(n-2-B)(n-4-B): the factored form of a0.
double a0_factored(const ProblemParams& params);

enum class Regime { Subcritical, Critical, Supercritical, OutOfRange };
enum class Sign { Negative, Zero, Positive };

std::string_view to_string(Regime regime);
std::string_view to_string(Sign sign);
char sign_char(Sign sign);

struct RegimeReport {
  Regime regime;
  /// Signs of (a0, a1, a3). Values within 1e-12·(1+|a2|) of zero are Zero.
  std::array<Sign, 3> signs;
  /// Whether the signs agree with the pattern expected for the regime;
  /// empty for OutOfRange, where no pattern is asserted.
  std::optional<bool> signs_match;
};

/// Subcritical for P_C < p < P_S, Critical for |p - P_S| < 1e-12,
/// Supercritical for p > P_S, OutOfRange for p <= P_C.
RegimeReport classify_regime(const ProblemParams& params);

/// Window in which the removable / A0^{1/(p-1)} dichotomy is asserted:
/// -4 < α <= 0, P_C < p < (n+4+α)/(n-4), p != P_S. For 0 < α < 4 the
/// parameters are accepted as exploratory when P_C < p < (n+4)/(n-4).
struct DichotomyWindow {
  bool in_range = false;     // P_C < p < upper bound, critical p allowed
  bool inside = false;       // in_range, p != P_S, and α <= 0 or exploratory
  bool exploratory = false;  // 0 < α < 4: no dichotomy contract
  double lower = 0.0;
  double upper = 0.0;
  std::string reason;        // empty when inside
};

DichotomyWindow dichotomy_window(const ProblemParams& params);

/// a0^{1/(p-1)}; NaN when a0 <= 0.
double fixed_point_value(const CoefficientSet& coeffs, double p);

}  // namespace hhlab
