#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hhlab/dynamics.hpp"
#include "hhlab/errors.hpp"
#include "hhlab/poly_roots.hpp"
#include "oracles.hpp"

using namespace hhlab;

namespace {

const ProblemParams kSub{6, 0.0, 4.0, 2};

std::vector<double> sorted_real(const std::array<std::complex<double>, 4>& roots) {
  std::vector<double> out;
  for (const auto& z : roots) out.push_back(z.real());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("vector field examples") {
  const auto c = coefficients(kSub);
  const double ws = fixed_point_value(c, 4.0);
  CHECK(vector_field({}, c, 4.0) == std::array<double, 4>{0, 0, 0, 0});
  const auto at_ws = vector_field({ws, 0, 0, 0}, c, 4.0);
  CHECK(at_ws[3] == 0.0);
  const auto one = vector_field({1, 0, 0, 0}, c, 4.0);
  CHECK(one[3] == doctest::Approx(-559.0 / 81.0).epsilon(1e-14));
  const auto gen = vector_field({0.5, 0.1, -0.2, 0.3}, c, 4.0);
  CHECK(gen[0] == 0.1);
  CHECK(gen[1] == -0.2);
  CHECK(gen[2] == 0.3);
  CHECK(gen[3] ==
        doctest::Approx(std::pow(0.5, 4) - c.a3 * 0.3 - c.a2 * -0.2 - c.a1 * 0.1 - c.a0 * 0.5).epsilon(1e-14));
  CHECK_THROWS_AS(vector_field({-1e-3, 0, 0, 0}, c, 4.0), NonPositiveState);
}

TEST_CASE("vector field vanishes at both fixed points on sampled parameters") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> dn(5, 12);
  std::uniform_real_distribution<double> da(-3.9, 3.9), du(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const int n = dn(rng);
    const double alpha = da(rng);
    const auto e = critical_exponents({n, alpha, 2.0, 2});
    const double p = e.serrin + du(rng) * 6.0;
    const auto c = coefficients({n, alpha, p, 2});
    const auto fp = fixed_points(c, p);
    REQUIRE(fp.points.size() == 2);
    for (double w : fp.points) CHECK(std::abs(vector_field({w, 0, 0, 0}, c, p)[3]) < 1e-12);
  }
}

TEST_CASE("fixed points") {
  auto fp = fixed_points(coefficients(kSub), 4.0);
  REQUIRE(fp.points.size() == 2);
  CHECK(fp.points[0] == 0.0);
  CHECK(fp.points[1] == doctest::Approx(1.9917).epsilon(1e-4));
  CHECK_FALSE(fp.regime_violation);

  fp = fixed_points(coefficients({6, 0.0, 5.0, 2}), 5.0);
  CHECK(fp.points[1] == doctest::Approx(std::pow(9.0, 0.25)).epsilon(1e-15));

  fp = fixed_points(coefficients({5, -1.0, 3.2, 2}), 3.2);
  CHECK(fp.points.size() == 1);
  CHECK(fp.regime_violation);
}

TEST_CASE("power law evaluation") {
  const auto c = coefficients(kSub);
  const PowerLaw f(c, 4.0);
  for (double w : {0.0, 1e-8, 0.3, 1.9, 2.5, 1e3}) {
    CHECK(f(w) == doctest::Approx(std::pow(w, 4.0)).epsilon(1e-14));
    CHECK(f.derivative(w) == doctest::Approx(4.0 * std::pow(w, 3.0)).epsilon(1e-14));
    CHECK(f.potential(w) == doctest::Approx(std::pow(w, 5.0) / 5.0).epsilon(1e-14));
  }
  const double ws = f.wstar();
  for (double d : {-1e-9, 1e-6, -0.3, 0.7}) {
    const double direct = std::pow(ws + d, 4.0) - c.a0 * (ws + d);
    CHECK(f.excess(ws, d) == doctest::Approx(direct).epsilon(1e-6));
    CHECK(f.excess(0.0, 0.5 + d) == doctest::Approx(std::pow(0.5 + d, 4.0) - c.a0 * (0.5 + d)).epsilon(1e-13));
  }
  // first-order behavior is exact for tiny deviations: (p-1) a0 δ
  CHECK(f.excess(ws, 1e-12) == doctest::Approx(3.0 * c.a0 * 1e-12).epsilon(1e-9));
  CHECK_THROWS_AS(f(-1.0), NonPositiveState);
}

TEST_CASE("linearization at zero: kernel roots") {
  const auto rep = linearize(0.0, coefficients(kSub), 4.0);
  const auto r = sorted_real(rep.roots);
  CHECK(r[0] == doctest::Approx(-8.0 / 3.0).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
  CHECK(r[2] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(r[3] == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  double prod = 1.0, sum = 0.0;
  for (double x : r) prod *= x, sum += x;
  CHECK(prod == doctest::Approx(640.0 / 81.0).epsilon(1e-12));
  CHECK(sum == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  CHECK(rep.n_forward_unstable == 2);
  CHECK(rep.char_coeffs[0] == 1.0);
}

TEST_CASE("linearization at w*") {
  const auto c = coefficients(kSub);
  const auto rep = linearize(fixed_point_value(c, 4.0), c, 4.0);
  CHECK(rep.char_coeffs[4] == doctest::Approx(-640.0 / 27.0).epsilon(1e-12));
  bool pos = false, neg = false;
  for (const auto& z : rep.roots) {
    if (std::abs(z.imag()) < 1e-12) {
      pos = pos || z.real() > 0;
      neg = neg || z.real() < 0;
    }
  }
  CHECK(pos);
  CHECK(neg);
  // roots reproduce the polynomial
  const auto back = polynomial_from_roots(rep.roots);
  for (int k = 0; k < 5; ++k) CHECK(back[k] == doctest::Approx(rep.char_coeffs[k]).epsilon(1e-8));
}

TEST_CASE("critical exponent: biquadratic roots") {
  const auto r = sorted_real(linearize(0.0, coefficients({6, 0.0, 5.0, 2}), 5.0).roots);
  CHECK(std::abs(r[0] + 3.0) < 1e-10);
  CHECK(std::abs(r[1] + 1.0) < 1e-10);
  CHECK(std::abs(r[2] - 1.0) < 1e-10);
  CHECK(std::abs(r[3] - 3.0) < 1e-10);
}

TEST_CASE("companion roots match the closed-form kernel set") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> dn(5, 12);
  std::uniform_real_distribution<double> da(-3.9, 3.9), dp(1.1, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const ProblemParams q{dn(rng), da(rng), dp(rng), 2};
    const auto c = coefficients(q);
    auto expect = oracle::kernel_roots(c.B, q.n);
    std::sort(expect.begin(), expect.end());
    const auto got = sorted_real(linearize(0.0, c, q.p).roots);
    for (int k = 0; k < 4; ++k) REQUIRE(std::abs(got[k] - expect[k]) < 1e-8 * (1.0 + std::abs(expect[k])));
  }
}

TEST_CASE("polynomial roots") {
  const std::vector<double> cubic{1.0, -6.0, 11.0, -6.0};
  const auto r = polynomial_roots(cubic);
  REQUIRE(r.size() == 3);
  CHECK(r[0].real() == doctest::Approx(1.0));
  CHECK(r[1].real() == doctest::Approx(2.0));
  CHECK(r[2].real() == doctest::Approx(3.0));
  const std::vector<double> circle{1.0, 0.0, 1.0};
  const auto z = polynomial_roots(circle);
  CHECK(std::abs(z[0] - std::complex<double>(0, -1)) < 1e-14);
  CHECK(std::abs(z[1] - std::complex<double>(0, 1)) < 1e-14);
  const std::vector<double> bad{0.0, 1.0};
  CHECK_THROWS_AS(polynomial_roots(bad), InvalidArgument);
}

TEST_CASE("integration: fixed point and zero are exact") {
  const auto c = coefficients(kSub);
  const double ws = fixed_point_value(c, 4.0);
  const Trajectory t = integrate({ws, 0, 0, 0}, 0.0, -40.0, c, 4.0);
  CHECK(t.termination() == Termination::ReachedEnd);
  CHECK(t.times().back() == -40.0);
  double drift = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) drift = std::max(drift, std::abs(t.state(i).w0 - ws));
  CHECK(drift < 1e-6);

  const Trajectory z = integrate({}, 0.0, -20.0, c, 4.0);
  for (std::size_t i = 0; i < z.size(); ++i) REQUIRE(z.state(i) == OdeState{});
  CHECK(classify_limit(z, c, 4.0).tag == LimitTag::ConvergesToZero);
  CHECK(classify_limit(t, c, 4.0).tag == LimitTag::ConvergesToFixedPoint);
}

TEST_CASE("integration agrees with a fixed-step RK4 oracle") {
  const auto c = coefficients(kSub);
  const auto o = oracle::coefficients(6, 0.0, 4.0);
  const OdeState y0{1.99, 1e-3, -2e-3, 1e-3};
  IntegratorOptions opt;
  opt.tol = 1e-12;
  const Trajectory t = integrate(y0, 0.0, -1.5, c, 4.0, opt);
  const auto ref = oracle::rk4(y0.as_array(), 0.0, -1.5, 20000, o, 4.0);
  const OdeState end = t.state(t.size() - 1);
  CHECK(end.w0 == doctest::Approx(ref[0]).epsilon(1e-9));
  CHECK(end.w1 == doctest::Approx(ref[1]).epsilon(1e-9));
  CHECK(end.w2 == doctest::Approx(ref[2]).epsilon(1e-9));
  CHECK(end.w3 == doctest::Approx(ref[3]).epsilon(1e-9));

  // dense output between samples
  const OdeState mid = t.at(-0.755);
  const auto ref_mid = oracle::rk4(y0.as_array(), 0.0, -0.755, 20000, o, 4.0);
  CHECK(mid.w0 == doctest::Approx(ref_mid[0]).epsilon(1e-8));
  CHECK(mid.w3 == doctest::Approx(ref_mid[3]).epsilon(1e-7));
}

TEST_CASE("time-translation equivariance") {
  const auto c = coefficients(kSub);
  const OdeState y0{1.99, 1e-3, -2e-3, 1e-3};
  const Trajectory a = integrate(y0, 0.0, -2.0, c, 4.0);
  const Trajectory b = integrate(y0, 3.0, 1.0, c, 4.0);
  for (double s : {-0.5, -1.0, -1.73, -2.0}) {
    CHECK(b.at(3.0 + s).w0 == doctest::Approx(a.at(s).w0).epsilon(1e-8));
    CHECK(b.at(3.0 + s).w2 == doctest::Approx(a.at(s).w2).epsilon(1e-8));
  }
}

TEST_CASE("perturbation along a backward-decaying mode returns to w*") {
  const auto c = coefficients(kSub);
  const double ws = fixed_point_value(c, 4.0);
  const auto rep = linearize(ws, c, 4.0);
  double mu = 0.0;
  for (const auto& z : rep.roots) {
    if (std::abs(z.imag()) < 1e-12 && z.real() > mu) mu = z.real();
  }
  REQUIRE(mu > 0.0);
  const auto v = eigenvector(mu);
  const OdeState dev{1e-4 * v[0].real(), 1e-4 * v[1].real(), 1e-4 * v[2].real(), 1e-4 * v[3].real()};
  // the backward-growing mode at w* amplifies rounding by e^{3.1|t|}, which
  // caps the horizon over which this direction can be followed
  const ClassifyOptions copt{1e-3, 2.0};
  const Trajectory t = integrate_from(ws, dev, 0.0, -6.0, c, 4.0);
  CHECK(t.termination() == Termination::ReachedEnd);
  const LimitClass lc = classify_limit(t, c, 4.0, copt);
  CHECK(lc.tag == LimitTag::ConvergesToFixedPoint);
  CHECK(std::abs(lc.terminal_value - ws) < 1e-4);
  for (double s : {-1.0, -2.0, -3.0}) CHECK(std::abs(t.at(s).w0 - ws) < std::abs(dev.w0) * std::exp(mu * s) * 1.01 + 1e-9);

  // the same state handed to integrate() picks the w* anchor
  OdeState full = dev;
  full.w0 += ws;
  const Trajectory u = integrate(full, 0.0, -6.0, c, 4.0);
  CHECK(u.anchor().constant == ws);
  CHECK(classify_limit(u, c, 4.0, copt).tag == LimitTag::ConvergesToFixedPoint);
}

TEST_CASE("eigenvector is normalized") {
  const auto v = eigenvector({0.5, 1.0});
  double norm = 0.0;
  for (const auto& z : v) norm += std::norm(z);
  CHECK(norm == doctest::Approx(1.0));
  CHECK(std::abs(v[1] / v[0] - std::complex<double>(0.5, 1.0)) < 1e-14);
}

TEST_CASE("blow-up and positivity terminations") {
  const auto c = coefficients(kSub);
  const double ws = fixed_point_value(c, 4.0);
  const Trajectory up = integrate({ws + 0.5, 0, 0, 0}, 0.0, -60.0, c, 4.0);
  const Trajectory down = integrate({ws - 0.5, 0, 0, 0}, 0.0, -60.0, c, 4.0);
  const bool one_blows = up.termination() == Termination::BlowUp || down.termination() == Termination::BlowUp;
  CHECK(one_blows);
  for (const Trajectory* t : {&up, &down}) {
    const LimitClass lc = classify_limit(*t, c, 4.0);
    if (t->termination() == Termination::BlowUp) CHECK(lc.tag == LimitTag::BlowUp);
    if (t->termination() == Termination::NonPositive) {
      CHECK(lc.tag == LimitTag::Undetermined);
      CHECK(t->state(t->size() - 1).w0 >= 0.0);
    }
  }
}

TEST_CASE("integrator preconditions") {
  const auto c = coefficients(kSub);
  IntegratorOptions opt;
  opt.tol = 1e-3;
  CHECK_THROWS_AS(integrate({1, 0, 0, 0}, 0.0, -1.0, c, 4.0, opt), InvalidArgument);
  opt.tol = 1e-14;
  CHECK_THROWS_AS(integrate({1, 0, 0, 0}, 0.0, -1.0, c, 4.0, opt), InvalidArgument);
  CHECK_THROWS_AS(integrate({-1, 0, 0, 0}, 0.0, -1.0, c, 4.0), InvalidArgument);
}

TEST_CASE("classify_limit rejects short trajectories") {
  const auto c = coefficients(kSub);
  const Trajectory t = integrate({1, 0, 0, 0}, 0.0, -3.0, c, 4.0);
  if (t.termination() == Termination::ReachedEnd) CHECK_THROWS_AS(classify_limit(t, c, 4.0), InvalidArgument);
}

TEST_CASE("samples are uniformly spaced") {
  const auto c = coefficients(kSub);
  IntegratorOptions opt;
  opt.sample_spacing = 0.05;
  const Trajectory t = integrate({fixed_point_value(c, 4.0), 0, 0, 0}, 0.0, -2.02, c, 4.0, opt);
  CHECK(t.uniformly_sampled());
  CHECK(t.times()[1] == doctest::Approx(-0.05));
  CHECK(t.times().back() == doctest::Approx(-2.02));
  CHECK(t.backward());
  CHECK(t.deep_index() == t.size() - 1);
}

TEST_CASE("kernel anchor solves the linear part exactly") {
  const auto c = coefficients(kSub);
  const Anchor k{0.0, {{0.3, c.B}, {-0.02, c.B + 2.0}}};
  const double t = -1.3;
  const OdeState s = k.eval(t);
  const double lin = k.w4(t) + c.a3 * s.w3 + c.a2 * s.w2 + c.a1 * s.w1 + c.a0 * s.w0;
  CHECK(std::abs(lin) < 1e-12);
  const Anchor sh = k.shifted(0.4);
  CHECK(sh.eval(t).w0 == doctest::Approx(k.eval(t + 0.4).w0).epsilon(1e-15));
}
