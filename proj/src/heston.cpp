#include "momvar/heston.hpp"

#include <cmath>
#include <stdexcept>

#include "momvar/errors.hpp"
#include "momvar/quadrature.hpp"

namespace momvar {

namespace {

bool finite(double x) { return std::isfinite(x); }

void check_params(const HestonParams& p) { p.validate(); }

void check_time(double t, const char* where) {
  if (!std::isfinite(t) || t < 0.0)
    throw std::invalid_argument(std::string(where) + ": t must be finite and >= 0");
}

void require_martingale(const HestonParams& p, const char* where) {
  if (p.mu != 0.0)
    throw std::invalid_argument(std::string(where) + ": formula assumes mu == 0");
}

}  // namespace

void HestonParams::validate() const {
  if (!finite(kappa) || !finite(theta) || !finite(gamma) || !finite(rho) ||
      !finite(mu) || !finite(v0))
    throw std::invalid_argument("HestonParams: non-finite field");
  if (kappa <= 0.0) throw std::invalid_argument("HestonParams: kappa must be > 0");
  if (theta <= 0.0) throw std::invalid_argument("HestonParams: theta must be > 0");
  if (gamma < 0.0) throw std::invalid_argument("HestonParams: gamma must be >= 0");
  if (rho < -1.0 || rho > 1.0)
    throw std::invalid_argument("HestonParams: rho must be in [-1,1]");
  if (v0 < 0.0) throw std::invalid_argument("HestonParams: v0 must be >= 0");
}

namespace detail {

// All four helpers switch to a Taylor branch for small kappa*t where the
// direct expressions cancel.

double f_alpha(double kappa, double t) {
  // (1 - e^{-x})/kappa, x = kappa t. -expm1 is accurate down to x = 0.
  return -std::expm1(-kappa * t) / kappa;
}

double f_ramp(double kappa, double t) {
  const double x = kappa * t;
  if (x < 0.04) {
    // x^2/2 - x^3/3 + x^4/8 - x^5/30 + x^6/144 - x^7/840
    const double s = x * x * (1.0 / 2 + x * (-1.0 / 3 + x * (1.0 / 8 + x * (-1.0 / 30 + x * (1.0 / 144 - x / 840)))));
    return s / kappa;
  }
  return (-std::expm1(-x) - x * std::exp(-x)) / kappa;
}

double f_lag(double kappa, double t) {
  const double x = kappa * t;
  if (x < 0.04) {
    // x^2/2 - x^3/6 + x^4/24 - x^5/120 + x^6/720 - x^7/5040
    const double s = x * x * (1.0 / 2 + x * (-1.0 / 6 + x * (1.0 / 24 + x * (-1.0 / 120 + x * (1.0 / 720 - x / 5040)))));
    return s / kappa;
  }
  return (x + std::expm1(-x)) / kappa;
}

double f_curv(double kappa, double t) {
  const double x = kappa * t;
  if (x < 0.04) {
    // x^3/6 - x^4/24 + x^5/120 - x^6/720 + x^7/5040
    const double s = x * x * x * (1.0 / 6 + x * (-1.0 / 24 + x * (1.0 / 120 + x * (-1.0 / 720 + x / 5040))));
    return s / (kappa * kappa);
  }
  return (0.5 * x * x - x - std::expm1(-x)) / (kappa * kappa);
}

double w_helper(const HestonParams& p, double u) {
  const double e = std::exp(-p.kappa * u);
  return p.gamma * (p.v0 - p.theta) * u * e +
         p.gamma * p.theta * f_alpha(p.kappa, u);
}

double x_helper(const HestonParams& p, double t) {
  return p.gamma * p.rho *
         ((p.v0 - p.theta) * f_alpha(p.kappa, t) + p.theta * t);
}

double y_helper(const HestonParams& p, double t) {
  const double gr = p.gamma * p.rho;
  return (gr / p.kappa) * ((p.v0 - p.theta) * f_ramp(p.kappa, t) +
                           p.theta * f_lag(p.kappa, t));
}

double m_helper(const HestonParams& p, double u) {
  const double k = p.kappa;
  const double x = k * u;
  const double g2r2 = p.gamma * p.gamma * p.rho * p.rho;
  double m1, m2;
  if (x < 0.04) {
    // m1 = x^3/6 - x^4/8 + x^5/20 - x^6/72 + x^7/336 - x^8/1920
    m1 = x * x * x * (1.0 / 6 + x * (-1.0 / 8 + x * (1.0 / 20 + x * (-1.0 / 72 + x * (1.0 / 336 - x / 1920)))));
    // m2 = x^3/6 - x^4/12 + x^5/40 - x^6/180 + x^7/1008
    m2 = x * x * x * (1.0 / 6 + x * (-1.0 / 12 + x * (1.0 / 40 + x * (-1.0 / 180 + x / 1008))));
  } else {
    const double e = std::exp(-x);
    m1 = 1.0 - e * (1.0 + x + 0.5 * x * x);
    m2 = 2.0 * (e - 1.0) + x * (1.0 + e);
  }
  return (g2r2 / (k * k * k)) * ((p.v0 - p.theta) * m1 + p.theta * m2);
}

double qv_squared_form1(const HestonParams& p, double t) {
  const double k = p.kappa, th = p.theta, g2 = p.gamma * p.gamma;
  const double dv = p.v0 - th;
  const double k2 = k * k, k3 = k2 * k;
  const double e1 = std::exp(-k * t);
  const double e2 = e1 * e1;
  return (2.0 * (th - p.v0) / k) * (th + g2 / k) * t * e1 +
         2.0 * (g2 * th / k3 - dv * dv / k2) * e1 +
         (dv * dv / k2 - (g2 / k3) * (p.v0 - 0.5 * th)) * e2 +
         th * th * t * t + (2.0 * dv * th / k + g2 * th / k2) * t +
         dv * dv / k2 + (g2 / k3) * (p.v0 - 2.5 * th);
}

double qv_squared_form2(const HestonParams& p, double t) {
  const double k = p.kappa, th = p.theta, g2 = p.gamma * p.gamma;
  const double k2 = k * k, k3 = k2 * k;
  const double e1 = std::exp(-k * t);
  const double e2 = e1 * e1;
  const double em = -std::expm1(-k * t);  // 1 - e^{-kt}
  const double c_v0sq = em * em / k2;
  const double c_v0 = -(2.0 / k) * (th + g2 / k) * t * e1 +
                      (4.0 * th / k2) * e1 - (2.0 * th / k2 + g2 / k3) * e2 +
                      (2.0 * th / k) * t - 2.0 * th / k2 + g2 / k3;
  const double c_0 = (2.0 * th / k) * (th + g2 / k) * t * e1 +
                     2.0 * (g2 * th / k3 - th * th / k2) * e1 +
                     (th * th / k2 + 0.5 * g2 * th / k3) * e2 +
                     th * th * t * t + (g2 * th / k2 - 2.0 * th * th / k) * t +
                     th * th / k2 - 2.5 * g2 * th / k3;
  return c_v0sq * p.v0 * p.v0 + c_v0 * p.v0 + c_0;
}

double third_variation_regrouped(const HestonParams& p, double t) {
  // Slope/intercept grouping: coefficient on V0 is A, on theta is B - A.
  const double k = p.kappa;
  const double A = f_ramp(k, t);
  const double B = f_lag(k, t);
  return (2.0 * p.gamma * p.rho / k) * (p.v0 * A + p.theta * (B - A));
}

}  // namespace detail

double expected_variance(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "expected_variance");
  return p.theta + (p.v0 - p.theta) * std::exp(-p.kappa * t);
}

double expected_qv(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "expected_qv");
  return (p.v0 - p.theta) * detail::f_alpha(p.kappa, t) + p.theta * t;
}

double expected_variance_squared(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "expected_variance_squared");
  const double k = p.kappa, th = p.theta;
  const double q = (2.0 * k * th + p.gamma * p.gamma) / k;
  const double e1 = std::exp(-k * t);
  const double em = -std::expm1(-k * t);
  // 1/2 - e1 + e1^2/2 == (1-e1)^2 / 2
  return e1 * e1 * p.v0 * p.v0 + q * e1 * em * p.v0 + th * q * 0.5 * em * em;
}

double stationary_variance_squared(const HestonParams& p) {
  check_params(p);
  return p.theta * p.theta + p.gamma * p.gamma * p.theta / (2.0 * p.kappa);
}

double expected_v_times_iv(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "expected_v_times_iv");
  const double k = p.kappa, th = p.theta, g2 = p.gamma * p.gamma;
  const double dv = p.v0 - th;
  const double k2 = k * k;
  const double e1 = std::exp(-k * t);
  const double e2 = e1 * e1;
  return dv * (th + g2 / k) * t * e1 +
         (dv * (p.v0 - 2.0 * th) / k - g2 * p.v0 / k2) * e1 +
         (-dv * dv / k + (g2 / k2) * (p.v0 - 0.5 * th)) * e2 + th * th * t +
         dv * th / k + 0.5 * g2 * th / k2;
}

double expected_qv_squared(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "expected_qv_squared");
  const double f1 = detail::qv_squared_form1(p, t);
  const double f2 = detail::qv_squared_form2(p, t);
  if (std::fabs(f1 - f2) > 1e-12 * std::max(1.0, std::fabs(f1)))
    throw numeric_error("expected_qv_squared: algebraic forms disagree");
  return f1;
}

double longrun_qv_squared(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "longrun_qv_squared");
  const double k = p.kappa, th = p.theta;
  return th * th * t * t +
         (p.gamma * p.gamma * th / (k * k)) * detail::f_lag(k, t);
}

double expected_rv(const HestonParams& p, double u) {
  check_params(p);
  check_time(u, "expected_rv");
  require_martingale(p, "expected_rv");
  const double e = std::exp(-p.kappa * u);
  return (p.gamma * p.rho / p.kappa) *
         ((p.v0 - p.theta) * p.kappa * u * e +
          p.theta * p.kappa * detail::f_alpha(p.kappa, u));
}

double expected_third_variation(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "expected_third_variation");
  require_martingale(p, "expected_third_variation");
  const double k = p.kappa;
  return (2.0 * p.gamma * p.rho / k) *
         ((p.v0 - p.theta) * detail::f_ramp(k, t) +
          p.theta * detail::f_lag(k, t));
}

double expected_third_moment(const HestonParams& p, double t) {
  return 1.5 * expected_third_variation(p, t);
}

double longrun_third_variation(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "longrun_third_variation");
  return (2.0 * p.gamma * p.rho * p.theta / p.kappa) * detail::f_lag(p.kappa, t);
}

double drift_bias_third(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "drift_bias_third");
  return p.mu * p.mu * p.mu * t * t * t + 1.5 * p.mu * p.theta * t * t;
}

double drift_bias_fourth(const HestonParams& p, double t) {
  check_params(p);
  check_time(t, "drift_bias_fourth");
  const double mu = p.mu, th = p.theta;
  return mu * mu * mu * mu * t * t * t * t + 2.0 * mu * mu * th * t * t * t +
         (12.0 * p.gamma * p.rho * th * mu / p.kappa) *
             detail::f_curv(p.kappa, t);
}

double expected_r2v(const HestonParams& p, double u) {
  check_params(p);
  check_time(u, "expected_r2v");
  require_martingale(p, "expected_r2v");
  // R_u^2 = 2 int R sqrt(V) dW_s + int V ds, hence
  // E[R^2 V] = 2 E[V int R sqrt(V) dW_s] + E[V int V ds]
  //          = -2k m(u) + 2 gamma rho int_0^u E[R V] ds + E[V int V ds].
  const double q = 0.5 * expected_third_variation(p, u);  // int_0^u E[RV] ds
  return -2.0 * p.kappa * detail::m_helper(p, u) +
         2.0 * p.gamma * p.rho * q + expected_v_times_iv(p, u);
}

double expected_fourth_variation(const HestonParams& p, double t,
                                 double quad_rel_tol) {
  check_params(p);
  check_time(t, "expected_fourth_variation");
  require_martingale(p, "expected_fourth_variation");
  if (t == 0.0) return 0.0;
  const auto integrand = [&p](double u) { return expected_r2v(p, u); };
  const QuadResult q =
      integrate_adaptive(integrand, 0.0, t, quad_rel_tol, 1e-300);
  return 4.0 * q.value;
}

GmmConstants gmm_constants(const HestonParams& p, double delta) {
  check_params(p);
  if (!std::isfinite(delta) || delta <= 0.0)
    throw std::invalid_argument("gmm_constants: delta must be > 0");

  const double k = p.kappa, th = p.theta, g2 = p.gamma * p.gamma;
  const double k2 = k * k, k3 = k2 * k;
  const double x = k * delta;
  const double a = std::exp(-x);
  const double em = -std::expm1(-x);  // 1 - a

  GmmConstants gc;
  gc.delta = delta;
  gc.a = a;
  gc.b = th * em;
  gc.alpha = detail::f_alpha(k, delta);
  gc.beta = th * (delta - gc.alpha);
  gc.alpha3 = (2.0 * p.gamma * p.rho / k) * detail::f_ramp(k, delta);
  gc.beta3 = (2.0 * p.gamma * p.rho * th / k) *
             (detail::f_lag(k, delta) - detail::f_ramp(k, delta));

  gc.C = em * em / k2;
  gc.D = -(2.0 / k) * (th + g2 / k) * delta * a + (4.0 * th / k2) * a -
         (2.0 * th / k2 + g2 / k3) * a * a + (2.0 * th / k) * delta -
         2.0 * th / k2 + g2 / k3;
  gc.E = (2.0 * th / k) * (th + g2 / k) * delta * a +
         2.0 * (g2 * th / k3 - th * th / k2) * a +
         (th * th / k2 + 0.5 * g2 * th / k3) * a * a + th * th * delta * delta +
         (g2 * th / k2 - 2.0 * th * th / k) * delta + th * th / k2 -
         2.5 * g2 * th / k3;

  gc.c = a * a;
  gc.d = ((2.0 * k * th + g2) / k) * a * em;  // e^{-x} - e^{-2x} = a(1-a)
  gc.f = (th * (2.0 * k * th + g2) / k) * 0.5 * em * em;

  const double num = gc.C * gc.d + (gc.a - gc.c) * gc.D;
  gc.F = num / gc.alpha;
  gc.G = -gc.beta / gc.alpha * num + gc.C * gc.f + gc.b * gc.D +
         (1.0 - gc.c) * gc.E;
  return gc;
}

}  // namespace momvar
