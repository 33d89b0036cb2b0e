#pragma once

#include <string>

namespace momvar {

// Square-root stochastic volatility model
//   dR = mu dt + sqrt(V) dW_s
//   dV = kappa (theta - V) dt + gamma sqrt(V) dW_v,   d[W_s, W_v] = rho dt
// Time unit is YEARS everywhere; one trading day is 1/252 year.
struct HestonParams {
  double kappa = 0.0;  // mean-reversion rate (1/years)
  double theta = 0.0;  // long-run variance level (variance/year)
  double gamma = 0.0;  // volatility of variance
  double rho = 0.0;    // correlation between return and variance shocks
  double mu = 0.0;     // return drift (1/year); 0 = martingale return
  double v0 = 0.0;     // initial instantaneous variance (variance/year)

  // 2*kappa*theta > gamma^2 keeps V strictly positive. Reported as a flag,
  // never enforced: standard test parameter sets violate it.
  bool feller_ok() const { return 2.0 * kappa * theta > gamma * gamma; }

  // Throws std::invalid_argument on kappa<=0, theta<=0, gamma<0, |rho|>1,
  // v0<0 or any non-finite field.
  void validate() const;
};

constexpr double kTradingDaysPerYear = 252.0;
constexpr double kDayDelta = 1.0 / kTradingDaysPerYear;

// ---------------------------------------------------------------------------
// Closed-form expectations. All throw std::invalid_argument on negative time
// or non-finite inputs; mu must be 0 where noted (the formulas assume a
// martingale return).
// ---------------------------------------------------------------------------

// E[V_t] = v0 e^{-kt} + theta (1 - e^{-kt})
double expected_variance(const HestonParams& p, double t);

// E[[R]_t] = E[int_0^t V ds] = (1-e^{-kt})/k (v0-theta) + theta t
double expected_qv(const HestonParams& p, double t);

// E[V_t^2] (three-term closed form)
double expected_variance_squared(const HestonParams& p, double t);

// t -> infinity limit of E[V_t^2]: theta^2 + gamma^2 theta / (2 kappa)
double stationary_variance_squared(const HestonParams& p);

// E[V_t int_0^t V_u du]
double expected_v_times_iv(const HestonParams& p, double t);

// E[[R]_t^2]. Evaluates two independent algebraic forms and throws
// numeric_error if they disagree beyond 1e-12 * max(1, |value|).
double expected_qv_squared(const HestonParams& p, double t);

// Stationary-start E[[R]_t^2] = theta^2 t^2 + (gamma^2 theta/kappa^2) *
// (e^{-kt}/k + t - 1/k); the denominator of the simple gamma estimator.
double longrun_qv_squared(const HestonParams& p, double t);

// E[R_u V_u]; requires mu == 0.
double expected_rv(const HestonParams& p, double u);

// E[[R,R^2]_t] = 2 int_0^t E[R_u V_u] du; requires mu == 0.
double expected_third_variation(const HestonParams& p, double t);

// 1.5 * expected_third_variation: the model's E[R_t^3] under mu = 0.
double expected_third_moment(const HestonParams& p, double t);

// Stationary-start limit of E[[R,R^2]_t]:
// (2 gamma rho theta / kappa) (e^{-kt}/k + t - 1/k).
double longrun_third_variation(const HestonParams& p, double t);

// Bias E[R_t^3] - 1.5 E[[R,R^2]_t] under constant drift mu and a
// stationary variance start: mu^3 t^3 + 1.5 mu theta t^2.
double drift_bias_third(const HestonParams& p, double t);

// Bias E[R_t^4] - 1.5 E[[R^2]_t] under constant drift, stationary start:
// mu^4 t^4 + 2 mu^2 theta t^3 + (12 gamma rho theta mu / kappa) *
// ((1-e^{-kt})/k^2 + t^2/2 - t/k).
double drift_bias_fourth(const HestonParams& p, double t);

// E[R_u^2 V_u]; requires mu == 0.
double expected_r2v(const HestonParams& p, double u);

// E[[R^2]_t] = 4 int_0^t E[R_u^2 V_u] du by adaptive quadrature of the
// closed-form integrand (no closed form exists for the integral).
// Throws numeric_error if the requested relative tolerance is not met.
double expected_fourth_variation(const HestonParams& p, double t,
                                 double quad_rel_tol = 1e-10);

// ---------------------------------------------------------------------------
// Constants of the one-day-ahead recursions used by the GMM moment vector,
// for observation interval delta (years).
// ---------------------------------------------------------------------------
struct GmmConstants {
  double a = 0.0;       // e^{-k delta}: AR(1) coefficient of V
  double b = 0.0;       // theta (1 - a): AR(1) intercept of V
  double alpha = 0.0;   // (1 - e^{-k delta})/k
  double beta = 0.0;    // theta (delta - alpha): E[[R]|V] = alpha V + beta
  double alpha3 = 0.0;  // third-variation recursion slope on V
  double beta3 = 0.0;   // third-variation recursion intercept
  double C = 0.0;       // E[[R]^2|V] = C V^2 + D V + E
  double D = 0.0;
  double E = 0.0;
  double c = 0.0;       // E[V'^2|V] = c V^2 + d V + f
  double d = 0.0;
  double f = 0.0;
  double F = 0.0;       // E[[R]'^2|...] = c [R]^2 + F [R] + G
  double G = 0.0;
  double delta = 0.0;   // observation interval (years)
};

GmmConstants gmm_constants(const HestonParams& p, double delta);

// ---------------------------------------------------------------------------
// Proof-level helpers, exposed for unit tests of their small-t behaviour.
// ---------------------------------------------------------------------------
namespace detail {

// (1 - e^{-k t})/k
double f_alpha(double kappa, double t);
// A(t) = int_0^t k u e^{-k u} du = (1 - e^{-k t}(k t + 1))/k
double f_ramp(double kappa, double t);
// B(t) = int_0^t (1 - e^{-k u}) du = t - f_alpha
double f_lag(double kappa, double t);
// (1 - e^{-k t})/k^2 - t/k + t^2/2
double f_curv(double kappa, double t);

// w(u) = E[V_u int_0^u sqrt(V) dW_v]
double w_helper(const HestonParams& p, double u);
// x(t) = E[int sqrt(V) dW_s * int gamma sqrt(V) dW_v]
double x_helper(const HestonParams& p, double t);
// y(t) = E[int_0^t V ds * int_0^t sqrt(V) dW_s]
double y_helper(const HestonParams& p, double t);
// m(u) = E[int_0^u V ds * int_0^u R sqrt(V) dW_s]
double m_helper(const HestonParams& p, double u);

// The two printed forms of E[[R]_t^2].
double qv_squared_form1(const HestonParams& p, double t);
double qv_squared_form2(const HestonParams& p, double t);

// E[[R,R^2]_t] regrouped with coefficients on (V0, theta) instead of
// (V0-theta, theta); algebraically identical to expected_third_variation.
double third_variation_regrouped(const HestonParams& p, double t);

}  // namespace detail

}  // namespace momvar
