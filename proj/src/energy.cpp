#include "hhlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hhlab/errors.hpp"

namespace hhlab {

double sphere_measure(int n) {
  if (n < 1) throw InvalidArgument("sphere_measure: n must be positive");
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

EnergyValue energy(const OdeState& s, const CoefficientSet& c, double p, int n) {
  const PowerLaw f(c, p);
  // w3 w1                      from ∫ ∂_ttt w ∂_t w
  // -½ w2²                     from -½∫ (∂_tt w)²   (the |∂_t∇_θ w|², Δ_θ terms vanish)
  // +a3 w2 w1, +½ a2 w1²       lower-order cross terms
  // +½ a0 w0² - F(w0)          potential
  const double kinetic = s.w3 * s.w1 - 0.5 * (s.w2 * s.w2 - 2.0 * c.a3 * s.w2 * s.w1 - c.a2 * s.w1 * s.w1);
  const double potential = 0.5 * c.a0 * s.w0 * s.w0 - f.potential(s.w0);
  const double measure = sphere_measure(n);
  return {measure * (kinetic + potential), measure};
}

double energy_rate(const OdeState& s, const CoefficientSet& c, int n) {
  return sphere_measure(n) * (c.a3 * s.w2 * s.w2 - c.a1 * s.w1 * s.w1);
}

MonotonicityAudit audit_monotonicity(const Trajectory& traj, const CoefficientSet& c, double p, int n) {
  if (traj.size() < 100) throw InvalidArgument("audit_monotonicity: need at least 100 samples");
  if (!traj.uniformly_sampled()) {
    throw InvalidArgument("audit_monotonicity: samples are not uniform, resample first");
  }
  const std::size_t count = traj.size();
  std::vector<double> e(count);
  for (std::size_t i = 0; i < count; ++i) e[i] = energy(traj.state(i), c, p, n).value;

  MonotonicityAudit out;
  out.e_initial = e.front();
  out.e_final = e.back();
  out.e_min = *std::min_element(e.begin(), e.end());
  out.e_max = *std::max_element(e.begin(), e.end());

  const bool non_decreasing = c.a3 > 0.0;  // supercritical
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const auto& t = traj.times();
  for (std::size_t i = 1; i < count; ++i) {
    // change of E per unit increase of t
    const double rise = (t[i] > t[i - 1]) ? e[i] - e[i - 1] : e[i - 1] - e[i];
    const double bad = non_decreasing ? -rise : rise;
    const double allowance = 64.0 * eps * std::max({std::abs(e[i]), std::abs(e[i - 1]), 1.0});
    out.max_violation = std::max(out.max_violation, bad - allowance);
  }

  // the last interval may be short, so stop one sample early
  for (std::size_t i = 1; i + 2 < count; ++i) {
    const double fd = (e[i + 1] - e[i - 1]) / (t[i + 1] - t[i - 1]);
    const double rate = energy_rate(traj.state(i), c, n);
    out.rate_mismatch = std::max(out.rate_mismatch, std::abs(fd - rate) / (1.0 + std::abs(rate)));
  }
  return out;
}

Trajectory resample(const Trajectory& traj, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("resample: spacing must be positive");
  const auto& src = traj.times();
  const double t0 = src.front();
  const double t1 = src.back();
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  std::vector<double> times;
  std::vector<OdeState> devs;
  std::vector<double> w4;
  for (std::size_t k = 0;; ++k) {
    double t = t0 + dir * static_cast<double>(k) * spacing;
    const bool last = dir * (t - t1) >= -1e-12 * spacing;
    if (last) t = t1;
    const OdeState d = traj.deviation_at(t);
    times.push_back(t);
    devs.push_back(d);
    // ∂_t w3 from the Hermite interpolant is only cubic-accurate; take it from
    // the neighboring samples instead
    w4.push_back(std::numeric_limits<double>::quiet_NaN());
    if (last) break;
  }
  // derivative of w3 by linear interpolation of the stored w4 samples
  std::size_t j = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    while (j + 2 < src.size() && dir * (src[j + 1] - t) < 0.0) ++j;
    const double ta = src[j];
    const double tb = src.size() > 1 ? src[j + 1] : ta;
    const double s = tb == ta ? 0.0 : (t - ta) / (tb - ta);
    const double wb = src.size() > 1 ? traj.w4(j + 1) : traj.w4(j);
    w4[i] = (1.0 - s) * traj.w4(j) + s * wb;
  }
  return Trajectory(traj.anchor(), std::move(times), std::move(devs), std::move(w4), traj.termination(),
                    traj.tol());
}

double scaling_check(const Trajectory& traj, double lambda, const CoefficientSet& c, double p, int n) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("scaling_check: lambda must be positive");
  if (lambda == 1.0) return 0.0;
  if (!(traj.tol() > 0.0)) throw InvalidArgument("scaling_check: needs an integrated trajectory");
  if (traj.size() < 3) throw InvalidArgument("scaling_check: insufficient overlap");

  const double shift = std::log(lambda);
  const auto& t = traj.times();
  IntegratorOptions opt;
  opt.tol = traj.tol();
  // the spacing the trajectory was produced with, recovered from the grid
  opt.sample_spacing = std::abs(t[std::min<std::size_t>(t.size() - 2, 1000)] - t[0]) /
                       static_cast<double>(std::min<std::size_t>(t.size() - 2, 1000));
  const Trajectory scaled = integrate_from(traj.anchor().shifted(shift), traj.deviation(0), t.front() - shift,
                                          t.back() - shift, c, p, opt);

  const std::size_t overlap = std::min(scaled.size(), traj.size());
  if (overlap < 3) throw InvalidArgument("scaling_check: insufficient overlap");
  double worst = 0.0;
  for (std::size_t i = 0; i < overlap; ++i) {
    const double lhs = energy(scaled.state(i), c, p, n).value;  // E(t_i - ln λ; w_λ)
    const double rhs = energy(traj.state(i), c, p, n).value;    // E(t_i; w)
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace hhlab
