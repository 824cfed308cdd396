#include "hhlab/transform.hpp"

#include <cmath>
#include <sstream>

#include "hhlab/errors.hpp"

namespace hhlab {

// With θ = r d/dr and U_k = r^k u^(k), the t-derivatives of y(t) = u(e^t) are
//   y' = U1,  y'' = U1 + U2,  y''' = U1 + 3 U2 + U3,
// and w = e^{Bt} y gives w^(k) = e^{Bt} Σ_j C(k,j) B^{k-j} y^(j).

LogPoint to_log(const RadialJet& jet, double B) {
  if (!(jet.r > 0.0)) {
    std::ostringstream os;
    os << "radius must be positive, got " << jet.r;
    throw InvalidArgument(os.str());
  }
  const double r = jet.r;
  const double t = std::log(r);
  const double U1 = r * jet.u1;
  const double U2 = r * r * jet.u2;
  const double U3 = r * r * r * jet.u3;

  const double y0 = jet.u0;
  const double y1 = U1;
  const double y2 = U1 + U2;
  const double y3 = U1 + 3.0 * U2 + U3;

  const double scale = std::pow(r, B);
  const double B2 = B * B;
  OdeState s;
  s.w0 = scale * y0;
  s.w1 = scale * (B * y0 + y1);
  s.w2 = scale * (B2 * y0 + 2.0 * B * y1 + y2);
  s.w3 = scale * (B2 * B * y0 + 3.0 * B2 * y1 + 3.0 * B * y2 + y3);
  return {t, s};
}

RadialJet from_log(double t, const OdeState& s, double B) {
  const double r = std::exp(t);
  const double scale = std::exp(-B * t);
  const double B2 = B * B;

  const double y0 = scale * s.w0;
  const double y1 = scale * (s.w1 - B * s.w0);
  const double y2 = scale * (s.w2 - 2.0 * B * s.w1 + B2 * s.w0);
  const double y3 = scale * (s.w3 - 3.0 * B * s.w2 + 3.0 * B2 * s.w1 - B2 * B * s.w0);

  // r^3 u''' = θ(θ-1)(θ-2)u = y''' - 3y'' + 2y'
  const double U1 = y1;
  const double U2 = y2 - y1;
  const double U3 = y3 - 3.0 * y2 + 2.0 * y1;

  return RadialJet{r, y0, U1 / r, U2 / (r * r), U3 / (r * r * r)};
}

double neg_laplacian_radial(double t, const OdeState& s, const ProblemParams& params) {
  const double B = coefficients(params).B;
  const double n = params.n;
  const double bracket = -s.w2 - (n - 2.0 - 2.0 * B) * s.w1 + B * (n - 2.0 - B) * s.w0;
  return std::exp((-B - 2.0) * t) * bracket;
}

}  // namespace hhlab
