#include "hhlab/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hhlab/errors.hpp"

namespace hhlab {
namespace {

constexpr double kCriticalTol = 1e-12;

// Horner with the rounding error of every step carried along (TwoProd by fma,
// TwoSum), so the result is as if evaluated in twice the working precision.
template <std::size_t N>
double compensated_horner(const std::array<double, N>& c, double x) {
  double s = c[0];
  double err = 0.0;
  for (std::size_t i = 1; i < N; ++i) {
    const double prod = s * x;
    const double prod_err = std::fma(s, x, -prod);
    const double sum = prod + c[i];
    const double z = sum - prod;
    const double sum_err = (prod - (sum - z)) + (c[i] - z);
    s = sum;
    err = err * x + (prod_err + sum_err);
  }
  return s + err;
}

Sign sign_of(double value, double zero_band) {
  if (std::abs(value) <= zero_band) return Sign::Zero;
  return value > 0 ? Sign::Positive : Sign::Negative;
}

void require_biharmonic(const ProblemParams& params) {
  if (params.m != 2) {
    throw InvalidArgument("coefficient algebra is only available for m = 2 (got m = " +
                          std::to_string(params.m) + ")");
  }
}

}  // namespace

void validate(const ProblemParams& params) {
  if (params.m < 1) throw InvalidArgument("m must be >= 1");
  if (params.n <= 2 * params.m) {
    std::ostringstream os;
    os << "dimension must exceed 2m: n = " << params.n << ", m = " << params.m;
    throw InvalidArgument(os.str());
  }
  if (!std::isfinite(params.alpha) || params.alpha <= -2.0 * params.m) {
    std::ostringstream os;
    os << "alpha must exceed -2m: alpha = " << params.alpha;
    throw InvalidArgument(os.str());
  }
  if (!std::isfinite(params.p) || params.p <= 1.0) {
    std::ostringstream os;
    os << "p must exceed 1: p = " << params.p;
    throw InvalidArgument(os.str());
  }
}

ExponentSet critical_exponents(const ProblemParams& params) {
  validate(params);
  const double n = params.n;
  const double a = params.alpha;
  const double two_m = 2.0 * params.m;
  const double d = n - two_m;
  return ExponentSet{
      .serrin = (n + a) / d,
      .hardy_sobolev = (n + two_m + 2.0 * a) / d,
      .sobolev = (n + two_m) / d,
      .dichotomy_upper = (n + two_m + a) / d,
  };
}

CoefficientSet coefficients(const ProblemParams& params) {
  validate(params);
  require_biharmonic(params);
  const double n = params.n;
  const double B = (4.0 + params.alpha) / (params.p - 1.0);
  const double q = n * n - 10.0 * n + 20.0;
  CoefficientSet c{};
  c.B = B;
  c.a0 = compensated_horner(std::array{1.0, -2.0 * (n - 4.0), q, 2.0 * (n - 2.0) * (n - 4.0), 0.0}, B);
  c.a1 = compensated_horner(std::array{-4.0, 6.0 * (n - 4.0), -2.0 * q, -2.0 * (n - 2.0) * (n - 4.0)}, B);
  c.a2 = compensated_horner(std::array{6.0, -6.0 * (n - 4.0), q}, B);
  c.a3 = -4.0 * B + 2.0 * n - 8.0;
  c.a4 = compensated_horner(std::array{2.0, -2.0 * (n - 4.0), -2.0 * (n - 4.0)}, B);
  return c;
}

double a0_factored(const ProblemParams& params) {
  validate(params);
  require_biharmonic(params);
  const double n = params.n;
  const double B = (4.0 + params.alpha) / (params.p - 1.0);
  return B * (B + 2.0) * (n - 2.0 - B) * (n - 4.0 - B);
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Subcritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::Supercritical: return "supercritical";
    case Regime::OutOfRange: return "out-of-range";
  }
  return "?";
}

std::string_view to_string(Sign sign) {
  switch (sign) {
    case Sign::Negative: return "negative";
    case Sign::Zero: return "zero";
    case Sign::Positive: return "positive";
  }
  return "?";
}

char sign_char(Sign sign) {
  switch (sign) {
    case Sign::Negative: return '-';
    case Sign::Zero: return '0';
    case Sign::Positive: return '+';
  }
  return '?';
}

RegimeReport classify_regime(const ProblemParams& params) {
  const ExponentSet ex = critical_exponents(params);
  const CoefficientSet c = coefficients(params);
  const double band = 1e-12 * (1.0 + std::abs(c.a2));

  RegimeReport report{};
  report.signs = {sign_of(c.a0, band), sign_of(c.a1, band), sign_of(c.a3, band)};

  const double p = params.p;
  if (p <= ex.serrin) {
    report.regime = Regime::OutOfRange;
  } else if (std::abs(p - ex.hardy_sobolev) < kCriticalTol) {
    report.regime = Regime::Critical;
  } else if (p < ex.hardy_sobolev) {
    report.regime = Regime::Subcritical;
  } else {
    report.regime = Regime::Supercritical;
  }

  using enum Sign;
  switch (report.regime) {
    case Regime::Subcritical:
      report.signs_match = report.signs == std::array{Positive, Positive, Negative};
      break;
    case Regime::Critical:
      report.signs_match = report.signs == std::array{Positive, Zero, Zero};
      break;
    case Regime::Supercritical:
      report.signs_match = report.signs == std::array{Positive, Negative, Positive};
      break;
    case Regime::OutOfRange:
      break;
  }
  return report;
}

DichotomyWindow dichotomy_window(const ProblemParams& params) {
  const ExponentSet ex = critical_exponents(params);
  DichotomyWindow w;
  w.lower = ex.serrin;
  w.exploratory = params.alpha > 0.0;
  w.upper = w.exploratory ? ex.sobolev : ex.dichotomy_upper;

  std::ostringstream why;
  if (params.m != 2) {
    why << "only m = 2 is supported";
  } else if (params.alpha >= 4.0) {
    why << "alpha must lie in (-4, 4)";
  } else if (params.p <= w.lower || params.p >= w.upper) {
    why << "p = " << params.p << " outside (" << w.lower << ", " << w.upper << ")";
  } else {
    w.in_range = true;
    if (std::abs(params.p - ex.hardy_sobolev) < kCriticalTol) {
      why << "p equals the critical exponent " << ex.hardy_sobolev;
    } else {
      w.inside = true;
    }
  }
  w.reason = why.str();
  return w;
}

double fixed_point_value(const CoefficientSet& coeffs, double p) {
  if (!(coeffs.a0 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::pow(coeffs.a0, 1.0 / (p - 1.0));
}

}  // namespace hhlab
