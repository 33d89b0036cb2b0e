#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "momvar/heston.hpp"
#include "momvar/realized.hpp"

namespace momvar {

// ---------------------------------------------------------------------------
// ARMA(1,1) by conditional sum of squares (demeaned series, innovations
// recursion n_i = y_i - ar*y_{i-1} - ma*n_{i-1}, n_0 = 0).
// ---------------------------------------------------------------------------
struct ArmaFit {
  double ar = 0.0;
  double ma = 0.0;
  double intercept = 0.0;
  double innovation_variance = 0.0;
  double loglik = 0.0;
  int iterations = 0;
  bool boundary_warning = false;  // |ar| pushed against the (-0.999,0.999) box
};

// Throws std::invalid_argument for length < 50 and numeric_error when the
// optimizer fails to converge.
ArmaFit fit_arma11(std::span<const double> series);

// ---------------------------------------------------------------------------
// The simple estimation pipeline: theta -> kappa -> gamma -> rho.
// ---------------------------------------------------------------------------

// mean(rv)/delta
double estimate_theta(const DailyMomentPanel& panel, double delta);

// -ln(ar)/delta from the ARMA fit of the rv series; throws numeric_error
// when the fitted AR coefficient is <= 0.
double estimate_kappa(const DailyMomentPanel& panel, double delta);

// sqrt{ (mean(rv^2) - theta^2 delta^2) / [(theta/kappa^2)(e^{-k d}/k + d - 1/k)] }
// Zero numerator returns 0 with a warning; negative numerator throws.
double estimate_gamma(const DailyMomentPanel& panel, double delta,
                      double theta_hat, double kappa_hat,
                      std::vector<std::string>* warnings = nullptr);

// mean(tv) / [(2 gamma theta / kappa)((e^{-k d}-1)/k + d)], clamped to
// [-1,1] with a warning when the raw ratio falls outside.
double estimate_rho(const DailyMomentPanel& panel, double delta,
                    double theta_hat, double kappa_hat, double gamma_hat,
                    std::vector<std::string>* warnings = nullptr);

struct EstimationReport {
  std::string method;  // "simple" | "gmm"

  // estimates (mu fixed at 0; v0 reported as theta, the stationary start)
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double theta = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();

  // standard errors (gmm only; gamma's SE is reported for gamma^2)
  double se_kappa = std::numeric_limits<double>::quiet_NaN();
  double se_theta = std::numeric_limits<double>::quiet_NaN();
  double se_gamma_squared = std::numeric_limits<double>::quiet_NaN();
  double se_rho = std::numeric_limits<double>::quiet_NaN();

  // diagnostics
  bool feller_ok = false;
  double arma_ma = std::numeric_limits<double>::quiet_NaN();
  double gmm_objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  std::int64_t m_days = 0;
  double delta = 0.0;
  std::vector<std::string> warnings;

  // gmm: the simple estimates used as the starting point
  double start_kappa = std::numeric_limits<double>::quiet_NaN();
  double start_theta = std::numeric_limits<double>::quiet_NaN();
  double start_gamma = std::numeric_limits<double>::quiet_NaN();
  double start_rho = std::numeric_limits<double>::quiet_NaN();

  // Validated parameter object (throws when estimates are degenerate).
  HestonParams params() const;
};

EstimationReport simple_estimate(const DailyMomentPanel& panel, double delta);

// ---------------------------------------------------------------------------
// Two-step GMM over the six-component moment vector.
// ---------------------------------------------------------------------------

// Panel rows j-2 .. j+1 (intervals ending before the residual's target);
// rv_p1 is the target interval, rv_0 its regressor, the rest instruments.
struct GmmWindow {
  double rv_m2 = 0.0, rv_m1 = 0.0, rv_0 = 0.0, rv_p1 = 0.0;
  double tv_m1 = 0.0, tv_0 = 0.0, tv_p1 = 0.0;
};

GmmWindow gmm_window(const DailyMomentPanel& panel, std::size_t j);

// The six components exactly as defined by the three recursions and the
// lagged instruments.
std::array<double, 6> gmm_moment_vector(const GmmConstants& gc,
                                        const GmmWindow& w);
std::array<double, 6> gmm_moment_vector(const HestonParams& eta, double delta,
                                        const GmmWindow& w);

// Sample mean of the moment vector over all admissible windows, plus
// per-component standard errors (for moment-validity checks).
struct GmmMomentStats {
  std::vector<double> mean;
  std::vector<double> se;
  std::int64_t n_obs = 0;
};
GmmMomentStats gmm_moment_stats(const HestonParams& eta, double delta,
                                const DailyMomentPanel& panel,
                                bool extra_instruments = false);

struct GmmOptions {
  int max_iterations = 4000;
  double ftol_rel = 1e-12;
  double jacobian_rel_step = 1e-5;
  bool use_extra_lag_instruments = false;  // two additional lagged instruments
};

// Two-step GMM (identity weight, then inverse Bartlett-HAC weight) started
// from the given parameters (normally the simple estimates). Requires
// panel.size() >= 100.
EstimationReport gmm_estimate(const DailyMomentPanel& panel, double delta,
                              const HestonParams& start,
                              const GmmOptions& opts = {});

}  // namespace momvar
