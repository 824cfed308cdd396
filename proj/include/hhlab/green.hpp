#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "hhlab/dynamics.hpp"
#include "hhlab/params.hpp"

namespace hhlab {

/// Log-uniform radii r_i = r_min·e^{ih}, i = 0..count-1, ending at r = 1.
class RadialGrid {
 public:
  explicit RadialGrid(double r_min = std::ldexp(1.0, -20), std::size_t count = 2048);

  /// Accepts radii read back from a file; they must be log-uniform to 1e-9
  /// and end at 1.
  static RadialGrid from_nodes(const std::vector<double>& nodes);

  std::size_t count() const { return nodes_.size(); }
  double r_min() const { return nodes_.front(); }
  double h() const { return h_; }
  double log_node(std::size_t i) const { return log_r_min_ + h_ * static_cast<double>(i); }
  const std::vector<double>& nodes() const { return nodes_; }

 private:
  double log_r_min_;
  double h_;
  std::vector<double> nodes_;
};

struct RadialField {
  RadialGrid grid;
  std::vector<double> values;
};

/// v with -Δv = f radially and v(1) = 0:
///   v(r) = ∫_r^1 τ^{1-n} ∫_0^τ f(s) s^{n-1} ds dτ.
/// The part of the inner integral below r_min is extrapolated from the two
/// innermost dyadic shells; IntegrabilityError if they do not shrink.
RadialField poisson_solve_radial(const RadialField& f, int n);

/// v with Δ²v = f and v(1) = Δv(1) = 0, as two nested Poisson solves.
RadialField bilaplacian_solve_radial(const RadialField& f, int n);

/// Samples u = r^{-B} w(ln r) from a trajectory on the grid. The trajectory
/// must cover [ln r_min, 0]. Throws NumericalError at the first node where
/// u <= 0.
RadialField field_from_trajectory(const Trajectory& traj, const ProblemParams& params, const RadialGrid& grid);

/// r^α u^p on the grid. Throws NumericalError at the first node where u <= 0.
RadialField forcing_field(const RadialField& u, const ProblemParams& params);

struct RepresentationResidual {
  std::size_t nodes = 0;
  /// RMS over the interior half of the grid of (u - G₂f - b)/u, where b is
  /// the least-squares fit from span{1, r², r^{2-n}, r^{4-n}}.
  double residual = 0.0;
  std::array<double, 4> biharmonic_coeffs{};
};

RepresentationResidual representation_residual(const RadialField& u, const ProblemParams& params);

struct RepresentationReport {
  std::vector<RepresentationResidual> levels;  // one per grid size
  std::vector<double> ratios;                  // residual[k] / residual[k+1]
};

/// representation_residual on grids of the given sizes (default 2048, 4096,
/// 8192) with r_min = 2^-20.
RepresentationReport representation_check(const Trajectory& traj, const ProblemParams& params,
                                          const std::vector<std::size_t>& counts = {2048, 4096, 8192});

struct SuperharmonicReport {
  double tau = 0.0;        // -Δu > 0 on [r_first, tau] over the samples
  double min_value = 0.0;  // min of -Δu there
  double r_first = 0.0;    // innermost sampled radius
  bool positive_throughout = false;
};

/// Requires a trajectory classified ConvergesToFixedPoint; a removable one
/// (ConvergesToZero) or any other class is rejected with InvalidArgument.
SuperharmonicReport superharmonic_check(const Trajectory& traj, const ProblemParams& params,
                                        const ClassifyOptions& classify = {});

struct IntegrabilityReport {
  bool l1_converges = false;
  bool weighted_diverges = false;
  /// S_{k+1}/S_k for shells [2^{-k-1}, 2^{-k}], k = 0, 1, ...
  std::vector<double> l1_ratios;
  std::vector<double> weighted_ratios;
};

/// Dyadic shell sums of r^α u^p r^{n-1} dr (L¹ test) and r^α u^p r dr (the
/// m = 2 weighted test). Convergence: the last six ratios are below 1.
/// Divergence: six consecutive ratios above 1. Needs t_min <= -16 ln 2.
IntegrabilityReport integrability_report(const Trajectory& traj, const ProblemParams& params);
/// Same tests on a sampled u, with shells rounded to grid nodes.
IntegrabilityReport integrability_report(const RadialField& u, const ProblemParams& params);

/// -log2 of a shell ratio: κ with S_k ∝ 2^{-κk}.
double shell_exponent(double ratio);

struct SingularityBound {
  /// sup of r^{B+i}|u^{(i)}(r)| over samples with r <= r_max, i = 0..3.
  std::array<double, 4> sup_values{};
  /// sup of r^B u over the innermost `window` time units.
  double inner_sup0 = 0.0;
};

SingularityBound singularity_bound_check(const Trajectory& traj, const ProblemParams& params,
                                         double r_max = 0.5, double window = 5.0);

/// `# radial-field n=<n> alpha=<α> p=<p>` followed by "radius,value" lines.
void write_field(std::ostream& os, const RadialField& field, const ProblemParams& params);

struct FieldFile {
  RadialField field;
  ProblemParams params;
};

/// Parses write_field output. Malformed input is InvalidArgument.
FieldFile read_field(std::istream& is);

}  // namespace hhlab
