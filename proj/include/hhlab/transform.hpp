#pragma once

#include <array>

#include "hhlab/params.hpp"

namespace hhlab {

/// Value and first three radial derivatives of u at radius r.
struct RadialJet {
  double r = 1.0;
  double u0 = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double u3 = 0.0;
};

/// (w, ∂_t w, ∂_tt w, ∂_ttt w) in log-radius t = ln r.
struct OdeState {
  double w0 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;

  friend bool operator==(const OdeState&, const OdeState&) = default;

  std::array<double, 4> as_array() const { return {w0, w1, w2, w3}; }
  static OdeState from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
};

struct LogPoint {
  double t;
  OdeState state;
};

/// w(t) = e^{Bt} u(e^t) and its t-derivatives. Throws for r <= 0.
LogPoint to_log(const RadialJet& jet, double B);

/// Inverse of to_log: u(r) = r^{-B} w(ln r).
RadialJet from_log(double t, const OdeState& state, double B);

/// -Δu at r = e^t for radial u, written in log variables:
///   r^{-B-2} [ -w2 - (n-2-2B) w1 + B(n-2-B) w0 ].
double neg_laplacian_radial(double t, const OdeState& state, const ProblemParams& params);

}  // namespace hhlab
