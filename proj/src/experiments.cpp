#include "hhlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "hhlab/energy.hpp"
#include "hhlab/errors.hpp"
#include "hhlab/green.hpp"

namespace hhlab {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Atlas: return "atlas";
    case ExperimentKind::Classification: return "classification";
    case ExperimentKind::EnergyAudit: return "energy-audit";
    case ExperimentKind::GreenStudy: return "green-study";
  }
  return "?";
}

std::string_view to_string(Sampling sampling) {
  switch (sampling) {
    case Sampling::Box: return "box";
    case Sampling::Singular: return "singular";
    case Sampling::Removable: return "removable";
    case Sampling::Mixed: return "mixed";
  }
  return "?";
}

std::string_view to_string(Center center) { return center == Center::FixedPoint ? "fixed-point" : "zero"; }

Sampling parse_sampling(std::string_view text) {
  for (Sampling s : {Sampling::Box, Sampling::Singular, Sampling::Removable, Sampling::Mixed}) {
    if (text == to_string(s)) return s;
  }
  throw InvalidArgument("unknown sampling '" + std::string(text) + "' (box, singular, removable, mixed)");
}

Center parse_center(std::string_view text) {
  if (text == "fixed-point") return Center::FixedPoint;
  if (text == "zero") return Center::Zero;
  throw InvalidArgument("unknown center '" + std::string(text) + "' (fixed-point, zero)");
}

namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream os;
  os << "kind=" << to_string(kind) << '\n';
  for (const auto& q : param_grid) os << "params=" << q.n << ',' << real(q.alpha) << ',' << real(q.p) << '\n';
  os << "tol=" << real(tol) << "\nsamples=" << samples << "\nseed=" << seed << "\nsampling=" << to_string(sampling)
     << "\ncenter=" << to_string(center) << "\nradius=" << real(radius) << "\namplitude=" << real(amplitude)
     << "\ndepth=" << real(depth) << "\nt_start=" << real(t_start) << "\nt_end=" << real(t_end)
     << "\nmargin=" << real(margin) << "\nwindow=" << real(window) << "\nsample_spacing=" << real(sample_spacing)
     << "\ngrid_nodes=" << grid_nodes << '\n';
  return os.str();
}

double counter_uniform(std::uint64_t seed, std::uint64_t row, std::uint64_t index) {
  // splitmix64 finalizer over a key built from the three counters
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (row + 1) + 0xd1b54a32d192ed03ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

namespace {

Sampling row_sampling(Sampling s, std::size_t row) {
  if (s != Sampling::Mixed) return s;
  return row % 2 == 0 ? Sampling::Singular : Sampling::Removable;
}

double fastest_decaying_backward_mode(const CoefficientSet& c, double p, double ws) {
  const LinearizationReport lin = linearize(ws, c, p);
  double mu = 0.0;
  for (const auto& z : lin.roots) {
    if (std::abs(z.imag()) <= 1e-12 * std::abs(z) && z.real() > mu) mu = z.real();
  }
  if (!(mu > 0.0)) throw NumericalError("no real mode decaying as t -> -inf at w*");
  return mu;
}

OdeState mode_state(double coef, double mu) { return {coef, coef * mu, coef * mu * mu, coef * mu * mu * mu}; }

}  // namespace

Trajectory generate_trajectory(const ExperimentConfig& cfg, const ProblemParams& params, std::size_t row,
                               double tol, double sample_spacing) {
  const CoefficientSet c = coefficients(params);
  const double p = params.p;
  const double ws = fixed_point_value(c, p);
  IntegratorOptions opt;
  opt.tol = tol;
  opt.sample_spacing = sample_spacing;
  auto draw = [&](std::uint64_t k) { return counter_uniform(cfg.seed, row, k); };

  switch (row_sampling(cfg.sampling, row)) {
    case Sampling::Box: {
      const bool at_fixed = cfg.center == Center::FixedPoint;
      if (at_fixed && !std::isfinite(ws)) throw InvalidArgument("a0 <= 0: no positive fixed point to sample around");
      OdeState dev{cfg.radius * (2.0 * draw(0) - 1.0), cfg.radius * (2.0 * draw(1) - 1.0),
                   cfg.radius * (2.0 * draw(2) - 1.0), cfg.radius * (2.0 * draw(3) - 1.0)};
      if (!at_fixed) dev.w0 = cfg.radius * draw(0);
      return integrate_from(at_fixed ? ws : 0.0, dev, cfg.t_start, cfg.t_end, c, p, opt);
    }
    case Sampling::Singular: {
      if (!std::isfinite(ws)) throw InvalidArgument("a0 <= 0: no singular solutions to sample");
      const double mu = fastest_decaying_backward_mode(c, p, ws);
      const double sign = draw(1) < 0.5 ? -1.0 : 1.0;
      const double coef = sign * cfg.amplitude * (0.2 + 0.8 * draw(0));
      return integrate_from(ws, mode_state(coef * std::exp(mu * cfg.depth), mu), cfg.depth, 0.0, c, p, opt);
    }
    case Sampling::Removable:
    case Sampling::Mixed: {
      const double a = 0.1 + 0.9 * draw(0);
      const double b = 0.1 * a * (2.0 * draw(1) - 1.0);
      // u = a + b r² near the origin; the linear part is carried exactly
      const Anchor kernel{0.0, {{a, c.B}, {b, c.B + 2.0}}};
      return integrate_from(kernel, OdeState{}, cfg.depth, 0.0, c, p, opt);
    }
  }
  throw InvalidArgument("unknown sampling");
}

namespace {

using Row = std::vector<Cell>;

// Runs work(i) for i in [0, count) on `jobs` threads; results keep index order.
std::vector<Row> run_rows(std::size_t count, unsigned jobs, const std::function<Row(std::size_t)>& work) {
  std::vector<Row> rows(count);
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) rows[i] = work(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < threads; ++k) {
      pool.emplace_back([&, k] {
        try {
          for (std::size_t i = next++; i < count; i = next++) rows[i] = work(i);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

Cell cell(std::string_view v) { return std::string(v); }
Cell flag(bool v) { return std::string(v ? "true" : "false"); }

Row blank(std::size_t width) { return Row(width); }

void tag_params(Row& row, const ProblemParams& q) {
  row[0] = static_cast<long long>(q.n);
  row[1] = q.alpha;
  row[2] = q.p;
}

void stamp(ResultTable& table, const ExperimentConfig& cfg) {
  table.add_provenance("hhlab " + std::string(kVersion) + " kind=" + std::string(to_string(cfg.kind)) +
                       " config=" + hex64(cfg.hash()));
}

std::string window_label(const DichotomyWindow& w) {
  if (!w.inside) return "outside";
  return w.exploratory ? "exploratory" : "inside";
}

}  // namespace

ResultTable run_atlas(const ExperimentConfig& cfg) {
  ResultTable table({"n", "alpha", "p", "status", "serrin", "hardy_sobolev", "sobolev", "dichotomy_upper", "B",
                     "a0", "a1", "a2", "a3", "a4", "regime", "signs", "signs_match", "wstar", "window", "error"});
  stamp(table, cfg);
  for (const auto& q : cfg.param_grid) {
    Row row = blank(table.schema().size());
    tag_params(row, q);
    try {
      validate(q);
      const ExponentSet ex = critical_exponents(q);
      const CoefficientSet c = coefficients(q);
      const RegimeReport reg = classify_regime(q);
      std::string signs;
      for (Sign s : reg.signs) signs += sign_char(s);
      row[3] = cell("ok");
      row[4] = ex.serrin;
      row[5] = ex.hardy_sobolev;
      row[6] = ex.sobolev;
      row[7] = ex.dichotomy_upper;
      row[8] = c.B;
      row[9] = c.a0;
      row[10] = c.a1;
      row[11] = c.a2;
      row[12] = c.a3;
      row[13] = c.a4;
      row[14] = cell(to_string(reg.regime));
      row[15] = signs;
      if (reg.signs_match) row[16] = flag(*reg.signs_match);
      const double ws = fixed_point_value(c, q.p);
      if (std::isfinite(ws)) row[17] = ws;
      row[18] = window_label(dichotomy_window(q));
    } catch (const std::exception& e) {
      row = blank(table.schema().size());
      tag_params(row, q);
      row[3] = cell("error");
      row[19] = std::string(e.what());
    }
    table.add_row(std::move(row));
  }
  return table;
}

ResultTable run_classification_sweep(const ExperimentConfig& cfg) {
  ResultTable table({"n", "alpha", "p", "row_kind", "sample", "window", "termination", "class", "terminal_value",
                     "window_variation", "stop_t", "e_min", "e_max", "class_half_tol", "label_changed", "n_zero",
                     "n_fixed_point", "n_blowup", "n_undetermined", "n_outside", "n_changed", "note"});
  stamp(table, cfg);
  const std::size_t width = table.schema().size();
  const ClassifyOptions copt{cfg.margin, cfg.window};

  for (const auto& q : cfg.param_grid) {
    DichotomyWindow win;
    std::string problem;
    try {
      validate(q);
      win = dichotomy_window(q);
      if (!win.inside) problem = win.reason;
    } catch (const std::exception& e) {
      problem = e.what();
    }
    if (!problem.empty()) {
      Row row = blank(width);
      tag_params(row, q);
      row[3] = cell("rejected");
      row[21] = "outside the dichotomy hypotheses: " + problem;
      table.add_row(std::move(row));
      continue;
    }
    const CoefficientSet c = coefficients(q);
    const double ws = fixed_point_value(c, q.p);
    const std::string label = window_label(win);

    auto work = [&](std::size_t i) {
      Row row = blank(width);
      tag_params(row, q);
      row[3] = cell("sample");
      row[4] = static_cast<long long>(i);
      row[5] = label;
      try {
        const Trajectory traj = generate_trajectory(cfg, q, i, cfg.tol, cfg.sample_spacing);
        const LimitClass lc = classify_limit(traj, c, q.p, copt);
        const Trajectory fine = generate_trajectory(cfg, q, i, cfg.tol / 2.0, cfg.sample_spacing);
        const LimitClass lc_fine = classify_limit(fine, c, q.p, copt);
        double e_min = std::numeric_limits<double>::infinity();
        double e_max = -e_min;
        for (std::size_t k = 0; k < traj.size(); ++k) {
          const double e = energy(traj.state(k), c, q.p, q.n).value;
          e_min = std::min(e_min, e);
          e_max = std::max(e_max, e);
        }
        row[6] = cell(to_string(traj.termination()));
        row[7] = cell(to_string(lc.tag));
        row[8] = lc.terminal_value;
        row[9] = lc.window_variation;
        row[10] = traj.times().back();
        row[11] = e_min;
        row[12] = e_max;
        row[13] = cell(to_string(lc_fine.tag));
        row[14] = flag(lc.tag != lc_fine.tag);
      } catch (const std::exception& e) {
        row[7] = cell(to_string(LimitTag::Undetermined));
        row[21] = std::string(e.what());
      }
      return row;
    };
    std::vector<Row> rows = run_rows(cfg.samples, cfg.jobs, work);

    long long counts[4] = {0, 0, 0, 0};
    long long outside = 0;
    long long changed = 0;
    for (const Row& row : rows) {
      const std::string& tag = std::get<std::string>(row[7]);
      for (LimitTag t : {LimitTag::ConvergesToZero, LimitTag::ConvergesToFixedPoint, LimitTag::BlowUp,
                         LimitTag::Undetermined}) {
        if (tag == to_string(t)) ++counts[static_cast<int>(t)];
      }
      if (const double* tv = std::get_if<double>(&row[8])) {
        if (tag == to_string(LimitTag::ConvergesToZero) && !(std::abs(*tv) < cfg.margin)) ++outside;
        if (tag == to_string(LimitTag::ConvergesToFixedPoint) && !(std::abs(*tv - ws) < cfg.margin)) ++outside;
      }
      if (const auto* s = std::get_if<std::string>(&row[14]); s && *s == "true") ++changed;
      table.add_row(row);
    }
    Row summary = blank(width);
    tag_params(summary, q);
    summary[3] = cell("summary");
    summary[5] = label;
    for (int k = 0; k < 4; ++k) summary[static_cast<std::size_t>(15 + k)] = counts[k];
    summary[19] = outside;
    summary[20] = changed;
    if (std::isfinite(ws)) summary[8] = ws;
    table.add_row(std::move(summary));
  }
  return table;
}

ResultTable run_energy_audit(const ExperimentConfig& cfg) {
  ResultTable table({"n", "alpha", "p", "sample", "source", "regime", "direction", "termination", "samples",
                     "max_violation", "rate_mismatch", "e_initial", "e_final", "scaling_em2", "scaling_em1",
                     "scaling_e1", "error"});
  stamp(table, cfg);
  const std::size_t width = table.schema().size();
  for (const auto& q : cfg.param_grid) {
    auto work = [&](std::size_t i) {
      Row row = blank(width);
      tag_params(row, q);
      row[3] = static_cast<long long>(i);
      row[4] = cell(to_string(row_sampling(cfg.sampling, i)));
      try {
        validate(q);
        const CoefficientSet c = coefficients(q);
        const RegimeReport reg = classify_regime(q);
        row[5] = cell(to_string(reg.regime));
        row[6] = cell(c.a3 > 0.0 ? "non-decreasing" : "non-increasing");
        const Trajectory traj = generate_trajectory(cfg, q, i, cfg.tol, 1e-3);
        row[7] = cell(to_string(traj.termination()));
        row[8] = static_cast<long long>(traj.size());
        const MonotonicityAudit audit = audit_monotonicity(traj, c, q.p, q.n);
        row[9] = audit.max_violation;
        row[10] = audit.rate_mismatch;
        row[11] = audit.e_initial;
        row[12] = audit.e_final;
        row[13] = scaling_check(traj, std::exp(-2.0), c, q.p, q.n);
        row[14] = scaling_check(traj, std::exp(-1.0), c, q.p, q.n);
        row[15] = scaling_check(traj, std::exp(1.0), c, q.p, q.n);
      } catch (const std::exception& e) {
        row[16] = std::string(e.what());
      }
      return row;
    };
    for (Row& row : run_rows(cfg.samples, cfg.jobs, work)) table.add_row(std::move(row));
  }
  return table;
}

namespace {

// u ≡ 1, i.e. w = e^{Bt}, sampled from 0 down to depth.
Trajectory constant_solution(double B, double depth, double spacing) {
  std::vector<double> times;
  std::vector<OdeState> states;
  std::vector<double> w4;
  for (std::size_t k = 0;; ++k) {
    double t = -static_cast<double>(k) * spacing;
    const bool last = t <= depth;
    if (last) t = depth;
    const double e = std::exp(B * t);
    times.push_back(t);
    states.push_back({e, B * e, B * B * e, B * B * B * e});
    w4.push_back(B * B * B * B * e);
    if (last) break;
  }
  return Trajectory::tabulate(std::move(times), std::move(states), std::move(w4));
}

}  // namespace

ResultTable run_green_study(const ExperimentConfig& cfg) {
  ResultTable table({"n", "alpha", "p", "source", "sample", "class", "residual_1", "residual_2", "residual_3",
                     "ratio_12", "ratio_23", "superharmonic", "tau", "min_neg_laplacian", "l1_converges",
                     "weighted_diverges", "sup0", "sup1", "sup2", "sup3", "inner_sup0", "error"});
  stamp(table, cfg);
  const std::size_t width = table.schema().size();
  const std::vector<std::size_t> counts{cfg.grid_nodes, 2 * cfg.grid_nodes, 4 * cfg.grid_nodes};
  const ClassifyOptions copt{cfg.margin, cfg.window};

  for (const auto& q : cfg.param_grid) {
    // row 0: exact singular solution, row 1: u ≡ 1, then sampled trajectories
    auto work = [&](std::size_t i) {
      Row row = blank(width);
      tag_params(row, q);
      try {
        validate(q);
        const CoefficientSet c = coefficients(q);
        const double ws = fixed_point_value(c, q.p);
        const bool exact = i == 0;
        const bool constant = i == 1;
        const std::size_t sample = i - 2;
        if (exact) {
          row[3] = cell("exact");
        } else if (constant) {
          row[3] = cell("constant");
        } else {
          row[3] = cell(to_string(row_sampling(cfg.sampling, sample)));
          row[4] = static_cast<long long>(sample);
        }
        if (exact && !std::isfinite(ws)) throw InvalidArgument("a0 <= 0: no exact singular solution");
        const double depth = std::min(cfg.depth, -16.0);
        const Trajectory traj =
            exact ? integrate_from(ws, {}, 0.0, depth, c, q.p, IntegratorOptions{cfg.tol, cfg.sample_spacing})
            : constant ? constant_solution(c.B, depth, cfg.sample_spacing)
                       : generate_trajectory(cfg, q, sample, cfg.tol, cfg.sample_spacing);
        const LimitClass lc = classify_limit(traj, c, q.p, copt);
        row[5] = cell(to_string(lc.tag));

        if (!constant) {
          const RepresentationReport rep = representation_check(traj, q, counts);
          row[6] = rep.levels[0].residual;
          row[7] = rep.levels[1].residual;
          row[8] = rep.levels[2].residual;
          row[9] = rep.ratios[0];
          row[10] = rep.ratios[1];
        }
        try {
          const SuperharmonicReport sh = superharmonic_check(traj, q, copt);
          row[11] = cell(sh.positive_throughout ? "positive" : "sign-change");
          row[12] = sh.tau;
          row[13] = sh.min_value;
        } catch (const InvalidArgument&) {
          row[11] = cell(lc.tag == LimitTag::ConvergesToZero ? "rejected-removable" : "rejected");
        }
        const IntegrabilityReport ir = integrability_report(traj, q);
        row[14] = flag(ir.l1_converges);
        row[15] = flag(ir.weighted_diverges);
        const SingularityBound sb = singularity_bound_check(traj, q, 0.5, cfg.window);
        for (std::size_t k = 0; k < 4; ++k) row[16 + k] = sb.sup_values[k];
        row[20] = sb.inner_sup0;
      } catch (const std::exception& e) {
        row[21] = std::string(e.what());
      }
      return row;
    };
    for (Row& row : run_rows(cfg.samples + 2, cfg.jobs, work)) table.add_row(std::move(row));
  }
  return table;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::Atlas: return run_atlas(cfg);
    case ExperimentKind::Classification: return run_classification_sweep(cfg);
    case ExperimentKind::EnergyAudit: return run_energy_audit(cfg);
    case ExperimentKind::GreenStudy: return run_green_study(cfg);
  }
  throw InvalidArgument("unknown experiment kind");
}

}  // namespace hhlab
