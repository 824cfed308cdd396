#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "hhlab/errors.hpp"
#include "hhlab/green.hpp"
#include "oracles.hpp"

using namespace hhlab;

namespace {

const ProblemParams kSub{6, 0.0, 4.0, 2};

RadialField sample(const RadialGrid& grid, const std::function<double(double)>& f) {
  RadialField out{grid, std::vector<double>(grid.count())};
  for (std::size_t i = 0; i < grid.count(); ++i) out.values[i] = f(grid.nodes()[i]);
  return out;
}

double max_error(const RadialField& v, const std::function<double(double)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < v.values.size(); ++i) e = std::max(e, std::abs(v.values[i] - exact(v.grid.nodes()[i])));
  return e;
}

Trajectory exact_singular(const ProblemParams& q, double depth = -16.0) {
  const auto c = coefficients(q);
  return integrate_from(fixed_point_value(c, q.p), {}, 0.0, depth, c, q.p);
}

Trajectory constant_one(double B, double depth) {
  std::vector<double> t, w4;
  std::vector<OdeState> s;
  for (int k = 0; k <= static_cast<int>(-depth * 100); ++k) {
    const double x = -0.01 * k;
    const double e = std::exp(B * x);
    t.push_back(x);
    s.push_back({e, B * e, B * B * e, B * B * B * e});
    w4.push_back(B * B * B * B * e);
  }
  return Trajectory::tabulate(t, s, w4);
}

Trajectory singular_shot(const ProblemParams& q, double coef) {
  const auto c = coefficients(q);
  const double ws = fixed_point_value(c, q.p);
  double mu = 0.0;
  for (const auto& z : linearize(ws, c, q.p).roots) {
    if (std::abs(z.imag()) < 1e-12 && z.real() > mu) mu = z.real();
  }
  const double a = coef * std::exp(-16.0 * mu);
  return integrate_from(ws, {a, a * mu, a * mu * mu, a * mu * mu * mu}, -16.0, 0.0, c, q.p);
}

// max |(u - v - b)/u| over the interior half, b the least-squares fit from
// span{1, r², r^{2-n}, r^{4-n}}
double projected_residual(const RadialGrid& g, const std::function<double(double)>& u, const RadialField& v, int n) {
  const std::size_t lo = g.count() / 4, hi = 3 * g.count() / 4;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(hi - lo), 4);
  Eigen::VectorXd b(static_cast<Eigen::Index>(hi - lo));
  for (std::size_t i = lo; i < hi; ++i) {
    const double r = g.nodes()[i];
    const double ui = u(r);
    const auto k = static_cast<Eigen::Index>(i - lo);
    a.row(k) << 1.0 / ui, r * r / ui, std::pow(r, 2.0 - n) / ui, std::pow(r, 4.0 - n) / ui;
    b(k) = (ui - v.values[i]) / ui;
  }
  for (int j = 0; j < 4; ++j) a.col(j).normalize();
  return (b - a * a.colPivHouseholderQr().solve(b)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("radial grid") {
  const RadialGrid g;
  CHECK(g.count() == 2048);
  CHECK(g.nodes().back() == 1.0);
  CHECK(g.r_min() == doctest::Approx(std::ldexp(1.0, -20)).epsilon(1e-14));
  for (std::size_t i = 1; i < g.count(); ++i) {
    REQUIRE(std::log(g.nodes()[i] / g.nodes()[i - 1]) == doctest::Approx(g.h()).epsilon(1e-10));
  }
  CHECK_THROWS_AS(RadialGrid(1e-3, 100), InvalidArgument);
  CHECK_THROWS_AS(RadialGrid(0.0, 1000), InvalidArgument);
  std::vector<double> bent = g.nodes();
  bent[10] *= 1.001;
  CHECK_THROWS_AS(RadialGrid::from_nodes(bent), InvalidArgument);
  CHECK(RadialGrid::from_nodes(g.nodes()).h() == doctest::Approx(g.h()));
}

TEST_CASE("poisson closed forms") {
  const RadialGrid g;
  CHECK(max_error(poisson_solve_radial(sample(g, [](double) { return 0.0; }), 6), [](double) { return 0.0; }) == 0.0);
  // quadrature error grows like (nh)^4
  for (int n : {5, 6, 8, 9}) {
    const RadialField v = poisson_solve_radial(sample(g, [](double) { return 1.0; }), n);
    CHECK(max_error(v, [n](double r) { return (1 - r * r) / (2.0 * n); }) < (n <= 8 ? 1e-8 : 2e-8));
  }
  const RadialField v = poisson_solve_radial(sample(g, [](double r) { return 1.0 / (r * r); }), 6);
  CHECK(max_error(v, [](double r) { return -std::log(r) / 4.0; }) < 1e-7);
}

TEST_CASE("bilaplacian of a constant with Navier data") {
  const RadialGrid g;
  for (int n : {5, 6, 8}) {
    const double a = 1.0 / (8.0 * n * (n + 2.0));
    const double b = -2.0 * a * (n + 2.0) / n;
    const double c0 = -a - b;
    const RadialField v = bilaplacian_solve_radial(sample(g, [](double) { return 1.0; }), n);
    CHECK(max_error(v, [&](double r) { return a * r * r * r * r + b * r * r + c0; }) < 1e-9);
    if (n == 6) {
      CHECK(c0 == doctest::Approx(5.0 / 1152.0).epsilon(1e-14));
      CHECK(std::abs(v.values.front() - 5.0 / 1152.0) < 1e-7);
    }
  }
  CHECK(max_error(bilaplacian_solve_radial(sample(g, [](double) { return 0.0; }), 6), [](double) { return 0.0; }) ==
        0.0);
}

TEST_CASE("poisson solve is linear") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const RadialGrid g(std::ldexp(1.0, -20), 1024);
  for (int trial = 0; trial < 5; ++trial) {
    const double c1 = d(rng), c2 = d(rng), c3 = d(rng), a = d(rng), b = d(rng);
    auto f = [&](double r) { return c1 + c2 * r + c3 * std::cos(5 * r); };
    auto h = [&](double r) { return c2 * std::pow(r, -1.5) + c1 * r * r; };
    const RadialField vf = poisson_solve_radial(sample(g, f), 6);
    const RadialField vh = poisson_solve_radial(sample(g, h), 6);
    const RadialField vs = poisson_solve_radial(sample(g, [&](double r) { return a * f(r) + b * h(r); }), 6);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.count(); ++i) {
      err = std::max(err, std::abs(vs.values[i] - a * vf.values[i] - b * vh.values[i]));
      scale = std::max(scale, std::abs(vs.values[i]));
    }
    CHECK(err <= 1e-11 * std::max(1.0, scale));
  }
}

TEST_CASE("maximum principle") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  const RadialGrid g(std::ldexp(1.0, -20), 512);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = d(rng), b = d(rng), s = 3.0 * d(rng);
    const RadialField v =
        poisson_solve_radial(sample(g, [&](double r) { return a + b * std::pow(r, -s) * (1.1 + std::sin(40 * r)); }), 6);
    for (double x : v.values) REQUIRE(x >= 0.0);
  }
}

TEST_CASE("non-integrable forcing raises an integrability error") {
  // u = r^{-(n-4)-ε}, p = 1, weight r^{-4}: f r^{n-1} ~ r^{-1-ε}
  const RadialGrid g;
  const double eps = 0.05;
  const RadialField f = sample(g, [&](double r) { return std::pow(r, -6.0 - eps); });
  CHECK_THROWS_AS(poisson_solve_radial(f, 6), IntegrabilityError);
  CHECK_THROWS_AS(bilaplacian_solve_radial(f, 6), IntegrabilityError);
}

TEST_CASE("bilaplacian inverts the power-law identity modulo biharmonics") {
  const int n = 7;
  const RadialGrid g(std::ldexp(1.0, -20), 4096);
  for (double gamma : {0.4, 1.3, 2.6}) {
    const double k = gamma * (gamma + 2) * (gamma - n + 2) * (gamma - n + 4);
    const RadialField v = bilaplacian_solve_radial(sample(g, [&](double r) { return k * std::pow(r, -gamma - 4); }), n);
    CHECK(projected_residual(g, [&](double r) { return std::pow(r, -gamma); }, v, n) < 1e-6);
  }
}

TEST_CASE("representation of the exact singular solution") {
  const RepresentationReport rep = representation_check(exact_singular(kSub, -16.0), kSub);
  REQUIRE(rep.levels.size() == 3);
  CHECK(rep.levels[0].residual <= 1e-4);
  CHECK(rep.levels[2].residual <= 2.5e-5);
  CHECK(rep.ratios[0] >= 2.0);
  CHECK(rep.ratios[1] >= 2.0);
}

TEST_CASE("representation of a pure biharmonic element is exact") {
  // zero nonlinearity: G₂[0] = 0 and u lies in the projected span
  const RadialGrid g;
  const RadialField v = bilaplacian_solve_radial(sample(g, [](double) { return 0.0; }), 6);
  for (double x : v.values) REQUIRE(x == 0.0);
  CHECK(projected_residual(g, [](double r) { return 2.0 + r * r + 1e-3 * std::pow(r, -2.0); }, v, 6) < 1e-13);
}

TEST_CASE("representation of removable and singular trajectories") {
  const auto q = kSub;
  const auto c = coefficients(q);
  const Anchor kernel{0.0, {{0.5, c.B}, {0.01, c.B + 2.0}}};
  const Trajectory removable = integrate_from(kernel, {}, -16.0, 0.0, c, q.p);
  const RepresentationReport r1 = representation_check(removable, q);
  const RepresentationReport r0 = representation_check(exact_singular(q), q);
  // forcing close to a polynomial in r²: the quadrature error lies in the
  // projected span, so the residual sits at rounding level
  for (std::size_t k = 0; k < 3; ++k) CHECK(r1.levels[k].residual <= std::max(r0.levels[k].residual, 1e-14));
  const RepresentationReport r2 = representation_check(singular_shot(q, 0.05), q);
  CHECK(r2.levels[0].residual <= 1e-4);
  CHECK(r2.ratios[0] >= 2.0);
}

TEST_CASE("superharmonic check") {
  const auto c = coefficients(kSub);
  const double ws = fixed_point_value(c, 4.0);
  const SuperharmonicReport exact = superharmonic_check(exact_singular(kSub), kSub);
  CHECK(exact.positive_throughout);
  CHECK(exact.tau == doctest::Approx(1.0));
  CHECK(exact.min_value == doctest::Approx(c.B * (6 - 2 - c.B) * ws).epsilon(1e-10));
  CHECK(exact.min_value == doctest::Approx(7.0816).epsilon(1e-4));

  for (double coef : {0.05, -0.05}) {
    const SuperharmonicReport s = superharmonic_check(singular_shot(kSub, coef), kSub);
    CHECK(s.tau > 0.0);
    CHECK(s.min_value > 0.0);
  }
  CHECK_THROWS_AS(superharmonic_check(constant_one(c.B, -20.0), kSub), InvalidArgument);
}

TEST_CASE("integrability of the exact singular solution") {
  const auto c = coefficients(kSub);
  const IntegrabilityReport rep = integrability_report(exact_singular(kSub, -17.0), kSub);
  CHECK(rep.l1_converges);
  CHECK(rep.weighted_diverges);
  const double k1 = 6 - 4 - c.B;  // shell exponent of r^{n-5-B}
  const double k2 = -c.B - 2;     // shell exponent of r^{-B-3}
  for (double r : rep.l1_ratios) CHECK(shell_exponent(r) == doctest::Approx(k1).epsilon(1e-6));
  for (double r : rep.weighted_ratios) CHECK(shell_exponent(r) == doctest::Approx(k2).epsilon(1e-6));
  CHECK(k1 == doctest::Approx(2.0 / 3.0));
  CHECK(k2 == doctest::Approx(-10.0 / 3.0));

  // the same on a sampled field whose grid puts every dyadic shell edge on a node
  const RadialGrid g(std::ldexp(1.0, -20), 2041);
  const double ws = fixed_point_value(c, 4.0);
  const IntegrabilityReport fr = integrability_report(sample(g, [&](double r) { return ws * std::pow(r, -c.B); }), kSub);
  CHECK(fr.l1_converges);
  CHECK(fr.weighted_diverges);
  CHECK(shell_exponent(fr.l1_ratios[3]) == doctest::Approx(k1).epsilon(1e-6));
}

TEST_CASE("integrability for u = 1 and for singular shots") {
  const auto c = coefficients(kSub);
  const IntegrabilityReport one = integrability_report(constant_one(c.B, -17.0), kSub);
  CHECK(one.l1_converges);
  CHECK_FALSE(one.weighted_diverges);
  CHECK(std::all_of(one.weighted_ratios.begin(), one.weighted_ratios.end(), [](double r) { return r < 1.0; }));

  const RadialGrid g;
  const IntegrabilityReport f1 = integrability_report(sample(g, [](double) { return 1.0; }), kSub);
  CHECK(f1.l1_converges);
  CHECK_FALSE(f1.weighted_diverges);

  const IntegrabilityReport s = integrability_report(singular_shot(kSub, 0.05), kSub);
  CHECK(s.l1_converges);
  CHECK(s.weighted_diverges);
  CHECK_THROWS_AS(integrability_report(exact_singular(kSub, -8.0), kSub), InvalidArgument);
}

TEST_CASE("singularity bound on the exact solution") {
  const auto c = coefficients(kSub);
  const double ws = fixed_point_value(c, 4.0);
  const double B = c.B;
  const SingularityBound sb = singularity_bound_check(exact_singular(kSub), kSub);
  CHECK(sb.sup_values[0] == doctest::Approx(ws).epsilon(1e-12));
  CHECK(sb.sup_values[1] == doctest::Approx(B * ws).epsilon(1e-12));
  CHECK(sb.sup_values[2] == doctest::Approx(B * (B + 1) * ws).epsilon(1e-12));
  CHECK(sb.sup_values[3] == doctest::Approx(B * (B + 1) * (B + 2) * ws).epsilon(1e-12));
  CHECK(sb.inner_sup0 == doctest::Approx(ws).epsilon(1e-12));
}

TEST_CASE("singularity bound on perturbed trajectories") {
  const auto c = coefficients(kSub);
  const double ws = fixed_point_value(c, 4.0);
  const SingularityBound s = singularity_bound_check(singular_shot(kSub, 0.05), kSub);
  for (double v : s.sup_values) CHECK(std::isfinite(v));
  CHECK(std::abs(s.inner_sup0 - ws) < 1e-3);

  const Anchor kernel{0.0, {{0.5, c.B}, {0.01, c.B + 2.0}}};
  const Trajectory removable = integrate_from(kernel, {}, -16.0, 0.0, c, 4.0);
  const SingularityBound r = singularity_bound_check(removable, kSub);
  for (double v : r.sup_values) CHECK(std::isfinite(v));
  // w -> 0 backward: the i = 0 sup sits at the outer end, far above the inner one
  CHECK(r.inner_sup0 < 1e-3 * r.sup_values[0]);
}

TEST_CASE("field files") {
  const RadialGrid g(std::ldexp(1.0, -20), 300);
  const RadialField u = sample(g, [](double r) { return 1.0 + r; });
  std::stringstream ss;
  write_field(ss, u, {6, -0.5, 4.25, 2});
  const FieldFile back = read_field(ss);
  CHECK(back.params == ProblemParams{6, -0.5, 4.25, 2});
  CHECK(back.field.values == u.values);
  CHECK(back.field.grid.nodes() == g.nodes());

  std::istringstream bad_header("# something n=6\n1,1\n");
  CHECK_THROWS_AS(read_field(bad_header), InvalidArgument);
  std::istringstream bad_number("# radial-field n=6 alpha=0 p=4\n0.5,abc\n");
  CHECK_THROWS_AS(read_field(bad_number), InvalidArgument);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_field(empty), InvalidArgument);

  RadialField neg = u;
  neg.values[17] = -0.25;
  try {
    (void)forcing_field(neg, kSub);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("node 17") != std::string::npos);
  }
}
