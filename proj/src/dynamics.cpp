#include "hhlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hhlab/errors.hpp"
#include "hhlab/poly_roots.hpp"

namespace hhlab {

PowerLaw::PowerLaw(const CoefficientSet& coeffs, double p)
    : p_(p), a0_(coeffs.a0), wstar_(fixed_point_value(coeffs, p)) {}

double PowerLaw::operator()(double w) const {
  if (w < 0.0) throw NonPositiveState("w0 < 0");
  if (w == 0.0) return 0.0;
  if (a0_ > 0.0) return a0_ * w * std::pow(w / wstar_, p_ - 1.0);
  return std::pow(w, p_);
}

double PowerLaw::derivative(double w) const {
  if (w <= 0.0) return 0.0;
  if (a0_ > 0.0) return p_ * a0_ * std::pow(w / wstar_, p_ - 1.0);
  return p_ * std::pow(w, p_ - 1.0);
}

double PowerLaw::potential(double w) const {
  if (w <= 0.0) return 0.0;
  return w * (*this)(w) / (p_ + 1.0);
}

double PowerLaw::excess(double anchor, double delta) const {
  const double w = anchor + delta;
  if (w < 0.0) throw NonPositiveState("w0 < 0");
  if (anchor != 0.0) {
    // a0·w·((w/w*)^{p-1} - 1) with w/w* = 1 + δ/w*
    return a0_ * w * std::expm1((p_ - 1.0) * std::log1p(delta / anchor));
  }
  return (*this)(w) - a0_ * w;
}

std::array<double, 4> vector_field(const OdeState& s, const CoefficientSet& c, double p) {
  const PowerLaw f(c, p);
  const double rhs = f.excess(0.0, s.w0) - c.a3 * s.w3 - c.a2 * s.w2 - c.a1 * s.w1;
  return {s.w1, s.w2, s.w3, rhs};
}

FixedPointSet fixed_points(const CoefficientSet& coeffs, double p) {
  if (!(p > 1.0)) throw InvalidArgument("fixed_points: p must exceed 1");
  if (!(coeffs.a0 > 0.0)) return {{0.0}, true};
  return {{0.0, fixed_point_value(coeffs, p)}, false};
}

LinearizationReport linearize(double point, const CoefficientSet& c, double p) {
  const PowerLaw f(c, p);
  LinearizationReport rep;
  rep.char_coeffs = {1.0, c.a3, c.a2, c.a1, c.a0 - f.derivative(point)};
  const auto roots = polynomial_roots(rep.char_coeffs);
  std::copy(roots.begin(), roots.end(), rep.roots.begin());
  rep.n_forward_unstable = static_cast<int>(
      std::count_if(roots.begin(), roots.end(), [](auto z) { return z.real() > 0.0; }));
  return rep;
}

std::array<std::complex<double>, 4> eigenvector(std::complex<double> mu) {
  std::array<std::complex<double>, 4> v{1.0, mu, mu * mu, mu * mu * mu};
  double norm = 0.0;
  for (const auto& z : v) norm += std::norm(z);
  norm = std::sqrt(norm);
  for (auto& z : v) z /= norm;
  return v;
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::ReachedEnd: return "ReachedEnd";
    case Termination::BlowUp: return "BlowUp";
    case Termination::NonPositive: return "NonPositive";
  }
  return "?";
}

std::string_view to_string(LimitTag tag) {
  switch (tag) {
    case LimitTag::ConvergesToZero: return "ConvergesToZero";
    case LimitTag::ConvergesToFixedPoint: return "ConvergesToFixedPoint";
    case LimitTag::BlowUp: return "BlowUp";
    case LimitTag::Undetermined: return "Undetermined";
  }
  return "?";
}

// ---------------------------------------------------------------- Anchor

OdeState Anchor::eval(double t) const {
  OdeState s{constant, 0.0, 0.0, 0.0};
  for (const auto& m : modes) {
    const double e = m.coef * std::exp(m.mu * t);
    s.w0 += e;
    s.w1 += m.mu * e;
    s.w2 += m.mu * m.mu * e;
    s.w3 += m.mu * m.mu * m.mu * e;
  }
  return s;
}

double Anchor::w4(double t) const {
  double out = 0.0;
  for (const auto& m : modes) out += m.mu * m.mu * m.mu * m.mu * m.coef * std::exp(m.mu * t);
  return out;
}

Anchor Anchor::shifted(double s) const {
  Anchor out = *this;
  for (auto& m : out.modes) m.coef *= std::exp(m.mu * s);
  return out;
}

// ---------------------------------------------------------------- Trajectory

Trajectory::Trajectory(Anchor anchor, std::vector<double> times, std::vector<OdeState> deviations,
                       std::vector<double> w4, Termination termination, double tol)
    : anchor_(std::move(anchor)),
      times_(std::move(times)),
      deviations_(std::move(deviations)),
      w4_(std::move(w4)),
      termination_(termination),
      tol_(tol) {
  if (times_.empty() || times_.size() != deviations_.size() || times_.size() != w4_.size()) {
    throw InvalidArgument("trajectory: times, states and derivatives must have equal nonzero length");
  }
  if (times_.size() > 1) {
    const bool up = times_[1] > times_[0];
    for (std::size_t i = 1; i < times_.size(); ++i) {
      if ((times_[i] > times_[i - 1]) != up || times_[i] == times_[i - 1]) {
        throw InvalidArgument("trajectory: times must be strictly monotone");
      }
    }
  }
  for (std::size_t i = 0; i < deviations_.size(); ++i) {
    const auto& d = deviations_[i];
    if (!std::isfinite(d.w0) || !std::isfinite(d.w1) || !std::isfinite(d.w2) ||
        !std::isfinite(d.w3) || !std::isfinite(w4_[i])) {
      throw NumericalError("trajectory: non-finite state");
    }
  }
}

Trajectory Trajectory::tabulate(std::vector<double> times, std::vector<OdeState> states,
                                std::vector<double> w4, Termination termination) {
  return Trajectory(Anchor{}, std::move(times), std::move(states), std::move(w4), termination, 0.0);
}

namespace {

OdeState add(const OdeState& a, const OdeState& b) { return {a.w0 + b.w0, a.w1 + b.w1, a.w2 + b.w2, a.w3 + b.w3}; }

}  // namespace

OdeState Trajectory::state(std::size_t i) const {
  if (anchor_.is_constant()) {
    OdeState s = deviations_[i];
    s.w0 += anchor_.constant;
    return s;
  }
  return add(anchor_.eval(times_[i]), deviations_[i]);
}

double Trajectory::t_min() const { return std::min(times_.front(), times_.back()); }
double Trajectory::t_max() const { return std::max(times_.front(), times_.back()); }

bool Trajectory::uniformly_sampled() const {
  if (times_.size() < 3) return true;
  const double h = times_[1] - times_[0];
  for (std::size_t i = 2; i + 1 < times_.size(); ++i) {
    if (std::abs((times_[i] - times_[i - 1]) - h) > 1e-9 * std::abs(h)) return false;
  }
  return true;
}

std::size_t Trajectory::bracket(double t) const {
  if (t < t_min() - 1e-12 || t > t_max() + 1e-12) {
    std::ostringstream os;
    os << "trajectory: t=" << t << " outside [" << t_min() << ", " << t_max() << "]";
    throw InvalidArgument(os.str());
  }
  if (times_.size() == 1) return 0;
  // first index i with t between times_[i] and times_[i+1]
  const bool up = !backward();
  auto it = up ? std::upper_bound(times_.begin(), times_.end(), t)
               : std::upper_bound(times_.begin(), times_.end(), t, std::greater<>());
  auto idx = static_cast<std::size_t>(it - times_.begin());
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, times_.size() - 2);
}

OdeState Trajectory::deviation_at(double t) const {
  const std::size_t i = bracket(t);
  if (times_.size() == 1) return deviations_[0];
  const double ta = times_[i];
  const double h = times_[i + 1] - ta;
  const double s = (t - ta) / h;
  if (s == 0.0) return deviations_[i];
  if (s == 1.0) return deviations_[i + 1];
  const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
  const double h10 = s * (1.0 - s) * (1.0 - s);
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = s * s * (s - 1.0);
  const auto a = deviations_[i].as_array();
  const auto b = deviations_[i + 1].as_array();
  const std::array<double, 4> da{a[1], a[2], a[3], w4_[i]};
  const std::array<double, 4> db{b[1], b[2], b[3], w4_[i + 1]};
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) out[k] = h00 * a[k] + h10 * h * da[k] + h01 * b[k] + h11 * h * db[k];
  return OdeState::from_array(out);
}

OdeState Trajectory::at(double t) const {
  OdeState s = deviation_at(t);
  if (anchor_.is_constant()) {
    s.w0 += anchor_.constant;
    return s;
  }
  return add(anchor_.eval(t), s);
}

// ---------------------------------------------------------------- integrator

namespace {

using Vec = std::array<double, 4>;

struct DeviationField {
  CoefficientSet c;
  PowerLaw f;
  const Anchor& anchor;

  Vec operator()(double t, const Vec& d) const {
    const double lower = c.a3 * d[3] + c.a2 * d[2] + c.a1 * d[1];
    if (anchor.is_constant()) return {d[1], d[2], d[3], f.excess(anchor.constant, d[0]) - lower};
    // the anchor solves the linear part, so only w^p is left as forcing
    return {d[1], d[2], d[3], f(anchor.eval(t).w0 + d[0]) - c.a0 * d[0] - lower};
  }

  double w0(double t, double d0) const {
    return anchor.is_constant() ? anchor.constant + d0 : anchor.eval(t).w0 + d0;
  }
};

Vec axpy(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
  Vec out = y;
  for (const auto& [coef, k] : terms) {
    for (int i = 0; i < 4; ++i) out[i] += h * coef * (*k)[i];
  }
  return out;
}

double inf_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Dormand–Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult {
  Vec y;
  Vec k7;
  double err;
};

StepResult dopri_step(const DeviationField& rhs, double t, const Vec& y, const Vec& k1, double h, double tol) {
  const Vec k2 = rhs(t + c2 * h, axpy(y, h, {{a21, &k1}}));
  const Vec k3 = rhs(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
  const Vec k4 = rhs(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const Vec k5 = rhs(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const Vec k6 = rhs(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const Vec ynew = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
  const Vec k7 = rhs(t + h, ynew);

  // Error relative to the size of the deviation: near an anchor the
  // deviation itself is the quantity being tracked.
  const double scale = std::max(inf_norm(y), inf_norm(ynew));
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = tol * (scale + std::max(std::abs(y[i]), std::abs(ynew[i]))) +
                      std::numeric_limits<double>::min();
    sum += (e / sc) * (e / sc);
  }
  return {ynew, k7, std::sqrt(sum / 4.0)};
}

}  // namespace

Trajectory integrate_from(const Anchor& anchor, const OdeState& deviation, double t0, double t1,
                          const CoefficientSet& coeffs, double p, const IntegratorOptions& opt) {
  if (!(opt.tol >= 1e-13 && opt.tol <= 1e-4)) {
    std::ostringstream os;
    os << "integrate: tol must lie in [1e-13, 1e-4], got " << opt.tol;
    throw InvalidArgument(os.str());
  }
  if (!(opt.sample_spacing > 0.0) || !(opt.max_step > 0.0) || !(opt.blowup_threshold > 0.0)) {
    throw InvalidArgument("integrate: sample spacing, max step and blow-up threshold must be positive");
  }
  if (!std::isfinite(t0) || !std::isfinite(t1) || t0 == t1) {
    throw InvalidArgument("integrate: need finite t0 != t1");
  }
  if (!anchor.is_constant() && anchor.constant != 0.0) {
    throw InvalidArgument("integrate: an anchor with modes must have constant part 0");
  }
  const DeviationField rhs{coeffs, PowerLaw(coeffs, p), anchor};
  if (rhs.w0(t0, deviation.w0) < 0.0) throw InvalidArgument("integrate: initial w0 must be >= 0");

  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double event_resolution = 1e-10;

  std::vector<double> times;
  std::vector<OdeState> devs;
  std::vector<double> w4s;

  Vec y = deviation.as_array();
  Vec k1 = rhs(t0, y);
  double t = t0;
  times.push_back(t);
  devs.push_back(deviation);
  w4s.push_back(k1[3]);

  std::size_t next_sample = 1;
  auto sample_time = [&](std::size_t k) {
    const double ts = t0 + dir * static_cast<double>(k) * opt.sample_spacing;
    return dir > 0 ? std::min(ts, t1) : std::max(ts, t1);
  };

  double h = dir * std::min({1e-3, opt.max_step, span});
  double err_old = 1e-4;
  Termination term = Termination::ReachedEnd;
  bool rejected_last = false;

  for (std::size_t steps = 0;; ++steps) {
    if (steps >= opt.max_steps) throw IntegrationError("integrate: step budget exhausted");
    const double target = sample_time(next_sample);
    const double to_target = target - t;
    const bool clipped = std::abs(h) >= std::abs(to_target);
    const double h_try = clipped ? to_target : h;

    if (std::abs(h_try) < 1e-14 * std::max(1.0, std::abs(t)) && !clipped) {
      std::ostringstream os;
      os << "integrate: step size underflow at t=" << t;
      throw IntegrationError(os.str());
    }

    StepResult res;
    try {
      res = dopri_step(rhs, t, y, k1, h_try, opt.tol);
    } catch (const NonPositiveState&) {
      // a stage left the positivity domain: shrink toward the crossing
      if (std::abs(h_try) * 0.5 < event_resolution) {
        term = Termination::NonPositive;
        break;
      }
      h = 0.5 * h_try;
      rejected_last = true;
      continue;
    }
    if (!std::isfinite(res.err)) {
      h = 0.25 * h_try;
      rejected_last = true;
      continue;
    }

    constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    constexpr double fac_min = 0.2, fac_max = 10.0;
    const double fac11 = std::pow(std::max(res.err, 1e-300), expo1);
    if (res.err <= 1.0) {
      double fac = fac11 / std::pow(err_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h_try / fac;
      if (rejected_last) h_new = dir * std::min(std::abs(h_new), std::abs(h_try));
      err_old = std::max(res.err, 1e-4);
      rejected_last = false;

      t = clipped ? target : t + h_try;
      y = res.y;
      k1 = res.k7;
      // keep the unclipped proposal so sample clipping does not shrink steps
      h = clipped ? dir * std::max(std::abs(h), std::abs(h_new)) : h_new;
      h = dir * std::min(std::abs(h), opt.max_step);

      const double w0 = rhs.w0(t, y[0]);
      if (clipped) {
        times.push_back(t);
        devs.push_back(OdeState::from_array(y));
        w4s.push_back(k1[3]);
        ++next_sample;
        if (t == t1) break;
      }
      if (w0 > opt.blowup_threshold) {
        term = Termination::BlowUp;
        break;
      }
    } else {
      h = h_try / std::min(1.0 / fac_min, fac11 / safe);
      rejected_last = true;
    }
  }

  if (term != Termination::ReachedEnd && times.back() != t) {
    times.push_back(t);
    devs.push_back(OdeState::from_array(y));
    w4s.push_back(k1[3]);
  }
  return Trajectory(anchor, std::move(times), std::move(devs), std::move(w4s), term, opt.tol);
}

Trajectory integrate(const OdeState& initial, double t0, double t1, const CoefficientSet& coeffs,
                     double p, const IntegratorOptions& options) {
  const double ws = fixed_point_value(coeffs, p);
  double anchor = 0.0;
  if (std::isfinite(ws) && std::abs(initial.w0 - ws) < std::abs(initial.w0)) anchor = ws;
  OdeState dev = initial;
  dev.w0 -= anchor;
  return integrate_from(anchor, dev, t0, t1, coeffs, p, options);
}

LimitClass classify_limit(const Trajectory& traj, const CoefficientSet& coeffs, double p,
                          const ClassifyOptions& opt) {
  if (!(opt.margin > 0.0) || !(opt.window > 0.0)) {
    throw InvalidArgument("classify_limit: margin and window must be positive");
  }
  LimitClass out;
  const std::size_t deep = traj.deep_index();
  out.terminal_value = traj.state(deep).w0;

  if (traj.backward() && traj.termination() != Termination::ReachedEnd) {
    out.tag = traj.termination() == Termination::BlowUp ? LimitTag::BlowUp : LimitTag::Undetermined;
    return out;
  }
  if (traj.t_max() - traj.t_min() < 2.0 * opt.window) {
    std::ostringstream os;
    os << "classify_limit: trajectory spans " << traj.t_max() - traj.t_min()
       << " time units, need at least " << 2.0 * opt.window;
    throw InvalidArgument(os.str());
  }

  const double ws = fixed_point_value(coeffs, p);
  const double edge = traj.t_min() + opt.window;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double dev_max = 0.0;  // max |w0 - w*| in the window
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times()[i] > edge) continue;
    const double w0 = traj.state(i).w0;
    lo = std::min(lo, w0);
    hi = std::max(hi, w0);
    if (std::isfinite(ws)) {
      // deviation storage keeps |w0 - w*| exact when anchored at w*
      const bool at_ws = traj.anchor().is_constant() && traj.anchor().constant == ws;
      const double d = at_ws ? traj.deviation(i).w0 : w0 - ws;
      dev_max = std::max(dev_max, std::abs(d));
    }
  }
  out.window_variation = hi - lo;

  if (hi < opt.margin && lo >= 0.0) {
    out.tag = LimitTag::ConvergesToZero;
  } else if (std::isfinite(ws) && dev_max < opt.margin && out.window_variation < opt.margin) {
    out.tag = LimitTag::ConvergesToFixedPoint;
  } else {
    out.tag = LimitTag::Undetermined;
  }
  return out;
}

}  // namespace hhlab
