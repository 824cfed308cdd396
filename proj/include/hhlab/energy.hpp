#pragma once

#include "hhlab/dynamics.hpp"
#include "hhlab/params.hpp"
#include "hhlab/transform.hpp"

namespace hhlab {

/// |S^{n-1}| = 2π^{n/2}/Γ(n/2).
double sphere_measure(int n);

struct EnergyValue {
  double value = 0.0;
  double sphere_measure = 0.0;
};

/// Radial energy
///   E = |S^{n-1}| [ w3 w1 - ½(w2² - 2 a3 w2 w1 - a2 w1²) + ½ a0 w0² - w0^{p+1}/(p+1) ].
/// Every angular integral of the general energy is zero for radial w.
EnergyValue energy(const OdeState& state, const CoefficientSet& coeffs, double p, int n);

/// dE/dt = |S^{n-1}| (a3 w2² - a1 w1²).
double energy_rate(const OdeState& state, const CoefficientSet& coeffs, int n);

struct MonotonicityAudit {
  /// Largest step of E in the forbidden direction (increase in t when a3 <= 0,
  /// decrease when a3 > 0), less a rounding allowance of 64 ulp of |E|.
  double max_violation = 0.0;
  /// max |dE/dt (centered differences) - energy_rate| / (1 + |energy_rate|).
  double rate_mismatch = 0.0;
  double e_initial = 0.0;
  double e_final = 0.0;
  double e_min = 0.0;
  double e_max = 0.0;
};

/// Requires at least 100 uniformly spaced samples; see resample().
MonotonicityAudit audit_monotonicity(const Trajectory& traj, const CoefficientSet& coeffs, double p, int n);

/// Uniform samples from the start of traj at the given spacing through
/// dense output. The final sample sits at the far end even if closer.
Trajectory resample(const Trajectory& traj, double spacing);

/// max_i |E(t_i; w_λ) - E(t_i + ln λ; w)| where w_λ is the scaled solution
/// u^λ(x) = λ^B u(λx) in log variables. The scaled solution is integrated
/// afresh from the scaled initial data, which in log variables is the initial
/// state placed at t0 - ln λ. Requires an integrated (not tabulated)
/// trajectory.
double scaling_check(const Trajectory& traj, double lambda, const CoefficientSet& coeffs, double p, int n);

}  // namespace hhlab
