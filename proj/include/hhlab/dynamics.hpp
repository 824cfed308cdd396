#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>
#include <vector>

#include "hhlab/params.hpp"
#include "hhlab/transform.hpp"

namespace hhlab {

/// The nonlinearity w ↦ w^p of the radial ODE.
///
/// When a0 > 0 the power is evaluated as a0·w·(w/w*)^{p-1}, which is w^p
/// rewritten around the positive fixed point w* = a0^{1/(p-1)}. In that form
/// w^p - a0·w vanishes identically at w = w*, so the constant singular
/// solution is an exact fixed point in floating point too.
class PowerLaw {
 public:
  PowerLaw(const CoefficientSet& coeffs, double p);

  double p() const { return p_; }
  double a0() const { return a0_; }
  /// NaN when a0 <= 0.
  double wstar() const { return wstar_; }

  /// w^p. Throws NonPositiveState for w < 0.
  double operator()(double w) const;
  /// p·w^{p-1}.
  double derivative(double w) const;
  /// w^{p+1}/(p+1).
  double potential(double w) const;
  /// w^p - a0·w at w = anchor + delta, evaluated without cancellation when
  /// anchor is w*. anchor must be 0 or w*.
  double excess(double anchor, double delta) const;

 private:
  double p_;
  double a0_;
  double wstar_;
};

/// (w1, w2, w3, w^p - a3 w3 - a2 w2 - a1 w1 - a0 w0). Throws NonPositiveState
/// for w0 < 0.
std::array<double, 4> vector_field(const OdeState& state, const CoefficientSet& coeffs, double p);

struct FixedPointSet {
  std::vector<double> points;     // {0} or {0, w*}
  bool regime_violation = false;  // a0 <= 0: no positive fixed point
};

FixedPointSet fixed_points(const CoefficientSet& coeffs, double p);

struct LinearizationReport {
  /// Monic quartic, leading coefficient first.
  std::array<double, 5> char_coeffs{};
  /// Sorted by real part, then imaginary part.
  std::array<std::complex<double>, 4> roots{};
  /// Roots with Re μ > 0. These modes decay as t → -∞.
  int n_forward_unstable = 0;
};

LinearizationReport linearize(double point, const CoefficientSet& coeffs, double p);

/// (1, μ, μ², μ³) normalized to unit Euclidean length: the state direction
/// of the solution e^{μt} of the linearized equation.
std::array<std::complex<double>, 4> eigenvector(std::complex<double> mu);

/// Reference solution that trajectories are stored and integrated relative
/// to: a constant fixed point (0 or w*), optionally plus real exponentials
/// Σ c_j e^{μ_j t} taken from the kernel of the linear operator at 0. With
/// modes present the constant must be 0 and each μ_j must be a root of the
/// linearization at 0, so the anchor solves the linear part exactly and the
/// integrator only tracks the nonlinear response.
struct Anchor {
  struct Mode {
    double coef;
    double mu;
  };
  double constant = 0.0;
  std::vector<Mode> modes;

  bool is_constant() const { return modes.empty(); }
  OdeState eval(double t) const;
  /// ∂_t of the third component.
  double w4(double t) const;
  /// The anchor of t ↦ w(t + s).
  Anchor shifted(double s) const;
};

enum class Termination { ReachedEnd, BlowUp, NonPositive };
std::string_view to_string(Termination termination);

struct IntegratorOptions {
  double tol = 1e-10;            // must lie in [1e-13, 1e-4]
  double sample_spacing = 1e-2;  // output grid in t
  double blowup_threshold = 1e6;
  double max_step = 0.25;
  std::size_t max_steps = 5'000'000;
};

/// A sampled solution of the radial ODE.
///
/// States are stored as deviations from an Anchor. Samples are uniformly
/// spaced from the start time except for the last one, which is the end or
/// termination time. Between samples, at()
/// interpolates each component by a cubic Hermite polynomial using the next
/// derivative, which is exact data of the ODE.
class Trajectory {
 public:
  Trajectory(Anchor anchor, std::vector<double> times, std::vector<OdeState> deviations,
             std::vector<double> w4, Termination termination, double tol);

  /// Wraps externally computed samples (anchor 0). w4 holds ∂_t w3.
  static Trajectory tabulate(std::vector<double> times, std::vector<OdeState> states,
                             std::vector<double> w4, Termination termination = Termination::ReachedEnd);

  std::size_t size() const { return times_.size(); }
  const Anchor& anchor() const { return anchor_; }
  double tol() const { return tol_; }
  Termination termination() const { return termination_; }
  const std::vector<double>& times() const { return times_; }
  const OdeState& deviation(std::size_t i) const { return deviations_[i]; }
  /// ∂_t of the third deviation component.
  double w4(std::size_t i) const { return w4_[i]; }
  OdeState state(std::size_t i) const;

  bool backward() const { return times_.size() > 1 && times_.back() < times_.front(); }
  double t_min() const;
  double t_max() const;
  /// Index of the sample at the t → -∞ end.
  std::size_t deep_index() const { return backward() ? size() - 1 : 0; }

  OdeState at(double t) const;
  OdeState deviation_at(double t) const;

  /// True when all but the last interval share one spacing to 1e-9 relative.
  bool uniformly_sampled() const;

 private:
  std::size_t bracket(double t) const;

  Anchor anchor_;
  std::vector<double> times_;
  std::vector<OdeState> deviations_;
  std::vector<double> w4_;
  Termination termination_;
  double tol_;
};

/// Adaptive Dormand–Prince 5(4) with PI step control from t0 to t1 (t1 < t0
/// integrates toward r → 0). The anchor is w* when the initial w0 is closer
/// to it than to 0, otherwise 0.
Trajectory integrate(const OdeState& initial, double t0, double t1, const CoefficientSet& coeffs,
                     double p, const IntegratorOptions& options = {});

/// As integrate, starting from anchor(t0) + deviation with an explicit anchor.
Trajectory integrate_from(const Anchor& anchor, const OdeState& deviation, double t0, double t1,
                          const CoefficientSet& coeffs, double p, const IntegratorOptions& options = {});

inline Trajectory integrate_from(double constant_anchor, const OdeState& deviation, double t0, double t1,
                                 const CoefficientSet& coeffs, double p, const IntegratorOptions& options = {}) {
  return integrate_from(Anchor{constant_anchor, {}}, deviation, t0, t1, coeffs, p, options);
}

enum class LimitTag { ConvergesToZero, ConvergesToFixedPoint, BlowUp, Undetermined };
std::string_view to_string(LimitTag tag);

struct LimitClass {
  LimitTag tag = LimitTag::Undetermined;
  double terminal_value = 0.0;    // w0 at the deepest sample
  double window_variation = 0.0;  // max - min of w0 over the deep window
};

struct ClassifyOptions {
  double margin = 1e-3;
  double window = 5.0;
};

/// Classifies the behavior as t → -∞ from the window of samples at the deep
/// end of the trajectory. A trajectory integrated backward that stopped at the
/// blow-up threshold is BlowUp; one that left the positivity domain is
/// Undetermined.
LimitClass classify_limit(const Trajectory& traj, const CoefficientSet& coeffs, double p,
                          const ClassifyOptions& options = {});

}  // namespace hhlab
