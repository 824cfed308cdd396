#include "hhlab/green.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "hhlab/errors.hpp"
#include "hhlab/transform.hpp"

namespace hhlab {

RadialGrid::RadialGrid(double r_min, std::size_t count) {
  if (!(r_min > 0.0 && r_min < 1.0)) throw InvalidArgument("RadialGrid: r_min must lie in (0, 1)");
  if (count < 256) throw InvalidArgument("RadialGrid: need at least 256 nodes");
  log_r_min_ = std::log(r_min);
  h_ = -log_r_min_ / static_cast<double>(count - 1);
  nodes_.resize(count);
  for (std::size_t i = 0; i < count; ++i) nodes_[i] = std::exp(log_node(i));
  nodes_.front() = r_min;
  nodes_.back() = 1.0;
}

RadialGrid RadialGrid::from_nodes(const std::vector<double>& nodes) {
  if (nodes.size() < 256) throw InvalidArgument("radial grid: need at least 256 nodes");
  if (nodes.back() != 1.0) throw InvalidArgument("radial grid: last node must be r = 1");
  RadialGrid grid(nodes.front(), nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (std::abs(std::log(nodes[i]) - grid.log_node(i)) > 1e-9 * std::max(1.0, std::abs(grid.log_node(i)))) {
      std::ostringstream os;
      os << "radial grid: node " << i << " (r=" << nodes[i] << ") breaks log-uniform spacing";
      throw InvalidArgument(os.str());
    }
  }
  return grid;
}

namespace {

// Integral of g over cell [x_i, x_{i+1}] from the cubic through four
// neighboring nodes; one-sided stencils in the end cells.
double cell_integral(const std::vector<double>& g, std::size_t i, double h) {
  const std::size_t n = g.size();
  if (i == 0) return h / 24.0 * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]);
  if (i == n - 2) return h / 24.0 * (g[n - 4] - 5.0 * g[n - 3] + 19.0 * g[n - 2] + 9.0 * g[n - 1]);
  return h / 24.0 * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]);
}

std::vector<double> cumulative_from_left(const std::vector<double>& g, double h) {
  std::vector<double> c(g.size(), 0.0);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) c[i + 1] = c[i] + cell_integral(g, i, h);
  return c;
}

std::vector<double> cumulative_from_right(const std::vector<double>& g, double h) {
  std::vector<double> c(g.size(), 0.0);
  for (std::size_t i = g.size() - 1; i-- > 0;) c[i] = c[i + 1] + cell_integral(g, i, h);
  return c;
}

// ∫_{-∞}^{x_0} g dx, treating the two innermost dyadic shells as consecutive
// terms of a geometric series.
double tail_integral(const std::vector<double>& cum, double h) {
  const auto k = static_cast<std::size_t>(std::lround(std::numbers::ln2 / h));
  if (k == 0 || 2 * k >= cum.size()) throw InvalidArgument("poisson_solve_radial: grid too short for tail test");
  const double s1 = cum[k] - cum[0];
  const double s2 = cum[2 * k] - cum[k];
  if (s1 == 0.0 && s2 == 0.0) return 0.0;
  const double rho = s2 / s1;
  if (!(s1 * s2 > 0.0) || !(rho > 1.0)) {
    std::ostringstream os;
    os << "inner integral does not converge at r -> 0 (dyadic shell ratio " << 1.0 / rho << " >= 1)";
    throw IntegrabilityError(os.str());
  }
  return s1 / (rho - 1.0);
}

double weighted_rms(const Eigen::VectorXd& v) { return std::sqrt(v.squaredNorm() / static_cast<double>(v.size())); }

void check_positive(const RadialField& u) {
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    if (!(u.values[i] > 0.0)) {
      std::ostringstream os;
      os << "field value " << u.values[i] << " at node " << i << " (r=" << u.grid.nodes()[i]
         << ") is not positive";
      throw NumericalError(os.str());
    }
  }
}

}  // namespace

RadialField poisson_solve_radial(const RadialField& f, int n) {
  if (n < 3) throw InvalidArgument("poisson_solve_radial: need n >= 3");
  const RadialGrid& grid = f.grid;
  const std::size_t count = grid.count();
  if (f.values.size() != count) throw InvalidArgument("poisson_solve_radial: field and grid sizes differ");
  const double h = grid.h();

  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = f.values[i] * std::exp(n * grid.log_node(i));
  const std::vector<double> inner = cumulative_from_left(g, h);
  const double tail = tail_integral(inner, h);

  std::vector<double> q(count);
  for (std::size_t i = 0; i < count; ++i) q[i] = std::exp((2 - n) * grid.log_node(i)) * (tail + inner[i]);
  return {grid, cumulative_from_right(q, h)};
}

RadialField bilaplacian_solve_radial(const RadialField& f, int n) {
  return poisson_solve_radial(poisson_solve_radial(f, n), n);
}

RadialField field_from_trajectory(const Trajectory& traj, const ProblemParams& params, const RadialGrid& grid) {
  const double B = coefficients(params).B;
  const double lo = grid.log_node(0);
  if (traj.t_min() > lo + 1e-9 || traj.t_max() < -1e-9) {
    std::ostringstream os;
    os << "trajectory covers t in [" << traj.t_min() << ", " << traj.t_max() << "], grid needs [" << lo
       << ", 0]";
    throw InvalidArgument(os.str());
  }
  RadialField u{grid, std::vector<double>(grid.count())};
  for (std::size_t i = 0; i < grid.count(); ++i) {
    const double t = std::clamp(grid.log_node(i), traj.t_min(), traj.t_max());
    u.values[i] = std::exp(-B * grid.log_node(i)) * traj.at(t).w0;
  }
  check_positive(u);
  return u;
}

RadialField forcing_field(const RadialField& u, const ProblemParams& params) {
  check_positive(u);
  RadialField f{u.grid, std::vector<double>(u.values.size())};
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double x = u.grid.log_node(i);
    f.values[i] = std::exp(params.alpha * x + params.p * std::log(u.values[i]));
  }
  return f;
}

RepresentationResidual representation_residual(const RadialField& u, const ProblemParams& params) {
  const RadialField v = bilaplacian_solve_radial(forcing_field(u, params), params.n);
  const std::size_t count = u.grid.count();
  const std::size_t first = count / 4;
  const std::size_t last = 3 * count / 4;
  const auto rows = static_cast<Eigen::Index>(last - first + 1);
  const int n = params.n;

  Eigen::MatrixXd a(rows, 4);
  Eigen::VectorXd b(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const std::size_t i = first + static_cast<std::size_t>(k);
    const double x = u.grid.log_node(i);
    const double inv = 1.0 / u.values[i];
    a(k, 0) = inv;
    a(k, 1) = std::exp(2.0 * x) * inv;
    a(k, 2) = std::exp((2 - n) * x) * inv;
    a(k, 3) = std::exp((4 - n) * x) * inv;
    b(k) = (u.values[i] - v.values[i]) * inv;
  }
  Eigen::Vector4d norms = a.colwise().norm().transpose();
  for (int j = 0; j < 4; ++j) a.col(j) /= norms(j);
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);

  RepresentationResidual out;
  out.nodes = count;
  out.residual = weighted_rms(b - a * c);
  for (int j = 0; j < 4; ++j) out.biharmonic_coeffs[static_cast<std::size_t>(j)] = c(j) / norms(j);
  return out;
}

RepresentationReport representation_check(const Trajectory& traj, const ProblemParams& params,
                                          const std::vector<std::size_t>& counts) {
  RepresentationReport rep;
  for (std::size_t count : counts) {
    const RadialGrid grid(std::ldexp(1.0, -20), count);
    rep.levels.push_back(representation_residual(field_from_trajectory(traj, params, grid), params));
  }
  for (std::size_t k = 0; k + 1 < rep.levels.size(); ++k) {
    rep.ratios.push_back(rep.levels[k].residual / rep.levels[k + 1].residual);
  }
  return rep;
}

SuperharmonicReport superharmonic_check(const Trajectory& traj, const ProblemParams& params,
                                        const ClassifyOptions& classify) {
  const CoefficientSet c = coefficients(params);
  const LimitClass cls = classify_limit(traj, c, params.p, classify);
  if (cls.tag == LimitTag::ConvergesToZero) {
    throw InvalidArgument("superharmonic_check: removable singularity (trajectory converges to 0)");
  }
  if (cls.tag != LimitTag::ConvergesToFixedPoint) {
    throw InvalidArgument(std::string("superharmonic_check: trajectory is not singular-class (") +
                          std::string(to_string(cls.tag)) + ")");
  }

  std::vector<std::size_t> order(traj.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = traj.backward() ? order.size() - 1 - i : i;

  SuperharmonicReport rep;
  rep.r_first = std::exp(traj.times()[order.front()]);
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.positive_throughout = true;
  for (std::size_t i : order) {
    const double t = traj.times()[i];
    const double value = neg_laplacian_radial(t, traj.state(i), params);
    if (!(value > 0.0)) {
      rep.positive_throughout = false;
      break;
    }
    rep.tau = std::exp(t);
    rep.min_value = std::min(rep.min_value, value);
  }
  if (rep.tau == 0.0) rep.min_value = 0.0;
  return rep;
}

namespace {

bool tail_below_one(const std::vector<double>& ratios) {
  if (ratios.size() < 6) return false;
  return std::all_of(ratios.end() - 6, ratios.end(), [](double r) { return r < 1.0; });
}

bool six_above_one(const std::vector<double>& ratios) {
  int run = 0;
  for (double r : ratios) {
    run = r > 1.0 ? run + 1 : 0;
    if (run >= 6) return true;
  }
  return false;
}

std::vector<double> shell_ratios(const std::vector<double>& sums) {
  std::vector<double> ratios;
  for (std::size_t k = 0; k + 1 < sums.size(); ++k) ratios.push_back(sums[k + 1] / sums[k]);
  return ratios;
}

}  // namespace

IntegrabilityReport integrability_report(const Trajectory& traj, const ProblemParams& params) {
  const CoefficientSet c = coefficients(params);
  const PowerLaw f(c, params.p);
  const double ln2 = std::numbers::ln2;
  const auto shells = static_cast<std::size_t>(std::floor(-traj.t_min() / ln2 + 1e-9));
  if (traj.t_max() < 0.0 || shells < 16) {
    throw InvalidArgument("integrability_report: trajectory must cover [-16 ln 2, 0]");
  }
  // r^α u^p = r^{-B-4} w^p
  const double l1_exp = params.n - c.B - 4.0;
  const double weighted_exp = -c.B - 2.0;

  std::vector<double> l1;
  std::vector<double> weighted;
  constexpr int kSub = 256;
  for (std::size_t k = 0; k < shells; ++k) {
    const double hi = -static_cast<double>(k) * ln2;
    const double step = ln2 / kSub;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int j = 0; j <= kSub; ++j) {
      const double x = std::max(hi - j * step, traj.t_min());
      const double weight = (j == 0 || j == kSub) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      double wp = 0.0;
      try {
        wp = f(traj.at(x).w0);
      } catch (const NonPositiveState&) {
        std::ostringstream os;
        os << "integrability_report: w < 0 at t=" << x;
        throw NumericalError(os.str());
      }
      s1 += weight * std::exp(l1_exp * x) * wp;
      s2 += weight * std::exp(weighted_exp * x) * wp;
    }
    l1.push_back(s1 * step / 3.0);
    weighted.push_back(s2 * step / 3.0);
  }
  IntegrabilityReport rep;
  rep.l1_ratios = shell_ratios(l1);
  rep.weighted_ratios = shell_ratios(weighted);
  rep.l1_converges = tail_below_one(rep.l1_ratios);
  rep.weighted_diverges = six_above_one(rep.weighted_ratios);
  return rep;
}

IntegrabilityReport integrability_report(const RadialField& u, const ProblemParams& params) {
  const RadialField f = forcing_field(u, params);
  const RadialGrid& grid = u.grid;
  std::vector<double> g1(grid.count());
  std::vector<double> g2(grid.count());
  for (std::size_t i = 0; i < grid.count(); ++i) {
    const double x = grid.log_node(i);
    g1[i] = f.values[i] * std::exp(params.n * x);
    g2[i] = f.values[i] * std::exp(2.0 * x);
  }
  const auto c1 = cumulative_from_left(g1, grid.h());
  const auto c2 = cumulative_from_left(g2, grid.h());

  const double last = static_cast<double>(grid.count() - 1);
  auto node_at = [&](double x) { return (x - grid.log_node(0)) / grid.h(); };
  std::vector<double> l1;
  std::vector<double> weighted;
  for (std::size_t k = 0;; ++k) {
    const double hi = node_at(-static_cast<double>(k) * std::numbers::ln2);
    const double lo = node_at(-static_cast<double>(k + 1) * std::numbers::ln2);
    if (lo < -1e-6) break;
    const auto ih = static_cast<std::size_t>(std::lround(std::min(hi, last)));
    const auto il = static_cast<std::size_t>(std::lround(std::max(lo, 0.0)));
    l1.push_back(c1[ih] - c1[il]);
    weighted.push_back(c2[ih] - c2[il]);
  }
  if (l1.size() < 16) throw InvalidArgument("integrability_report: grid must reach r_min <= 2^-16");
  IntegrabilityReport rep;
  rep.l1_ratios = shell_ratios(l1);
  rep.weighted_ratios = shell_ratios(weighted);
  rep.l1_converges = tail_below_one(rep.l1_ratios);
  rep.weighted_diverges = six_above_one(rep.weighted_ratios);
  return rep;
}

double shell_exponent(double ratio) { return -std::log2(ratio); }

SingularityBound singularity_bound_check(const Trajectory& traj, const ProblemParams& params, double r_max,
                                         double window) {
  const double B = coefficients(params).B;
  const double t_cut = std::log(r_max);
  const double t_inner = traj.t_min() + window;
  SingularityBound out;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times()[i];
    if (t > t_cut) continue;
    const OdeState s = traj.state(i);
    // r^B y^(j) in terms of w, then r^{B+k} u^(k) = r^B U_k
    const double y0 = s.w0;
    const double y1 = s.w1 - B * s.w0;
    const double y2 = s.w2 - 2.0 * B * s.w1 + B * B * s.w0;
    const double y3 = s.w3 - 3.0 * B * s.w2 + 3.0 * B * B * s.w1 - B * B * B * s.w0;
    const std::array<double, 4> scaled{y0, y1, y2 - y1, y3 - 3.0 * y2 + 2.0 * y1};
    for (std::size_t k = 0; k < 4; ++k) out.sup_values[k] = std::max(out.sup_values[k], std::abs(scaled[k]));
    if (t <= t_inner) out.inner_sup0 = std::max(out.inner_sup0, std::abs(y0));
  }
  return out;
}

void write_field(std::ostream& os, const RadialField& field, const ProblemParams& params) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "# radial-field n=%d alpha=%.17g p=%.17g\n", params.n, params.alpha, params.p);
  os << buf;
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", field.grid.nodes()[i], field.values[i]);
    os << buf;
  }
}

namespace {

double parse_double(std::string_view text, std::size_t line) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    std::ostringstream os;
    os << "field file line " << line << ": cannot parse number '" << text << "'";
    throw InvalidArgument(os.str());
  }
  return value;
}

}  // namespace

FieldFile read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("field file is empty");
  ProblemParams params;
  {
    std::istringstream header(line);
    std::string hash;
    std::string tag;
    header >> hash >> tag;
    if (hash != "#" || tag != "radial-field") {
      throw InvalidArgument("field file: first line must be '# radial-field n=<n> alpha=<alpha> p=<p>'");
    }
    bool seen_n = false, seen_a = false, seen_p = false;
    std::string kv;
    while (header >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidArgument("field file header: bad token '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const double value = parse_double(std::string_view(kv).substr(eq + 1), 1);
      if (key == "n") {
        params.n = static_cast<int>(value);
        if (params.n != value) throw InvalidArgument("field file header: n must be an integer");
        seen_n = true;
      } else if (key == "alpha") {
        params.alpha = value;
        seen_a = true;
      } else if (key == "p") {
        params.p = value;
        seen_p = true;
      } else {
        throw InvalidArgument("field file header: unknown key '" + key + "'");
      }
    }
    if (!seen_n || !seen_a || !seen_p) throw InvalidArgument("field file header: need n, alpha and p");
  }
  validate(params);

  std::vector<double> radii;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      std::ostringstream os;
      os << "field file line " << lineno << ": expected 'radius,value'";
      throw InvalidArgument(os.str());
    }
    radii.push_back(parse_double(std::string_view(line).substr(0, comma), lineno));
    values.push_back(parse_double(std::string_view(line).substr(comma + 1), lineno));
  }
  return {RadialField{RadialGrid::from_nodes(radii), std::move(values)}, params};
}

}  // namespace hhlab
