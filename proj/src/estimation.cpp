#include "momvar/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "momvar/errors.hpp"
#include "momvar/linalg.hpp"
#include "momvar/nelder_mead.hpp"
#include "momvar/stats_util.hpp"

namespace momvar {

namespace {

constexpr double kArmaBox = 0.999;

double css_objective(std::span<const double> y, double ar, double ma) {
  double n_prev = 0.0;
  double sse = 0.0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const double n_i = y[i] - ar * y[i - 1] - ma * n_prev;
    sse += n_i * n_i;
    n_prev = n_i;
  }
  return sse;
}

double lag1_autocorr(std::span<const double> y) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    den += y[i] * y[i];
    if (i > 0) num += y[i] * y[i - 1];
  }
  return den > 0.0 ? num / den : 0.0;
}

void add_warning(std::vector<std::string>* warnings, const std::string& w) {
  if (warnings) warnings->push_back(w);
}

}  // namespace

ArmaFit fit_arma11(std::span<const double> series) {
  if (series.size() < 50)
    throw std::invalid_argument("fit_arma11: insufficient data (need >= 50)");

  for (double v : series)
    if (!std::isfinite(v))
      throw std::invalid_argument("fit_arma11: non-finite value in series");
  const double ybar = mean(series);
  std::vector<double> y(series.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = series[i] - ybar;

  // Box constraint through u -> 0.999 tanh(u).
  const auto to_box = [](double u) { return kArmaBox * std::tanh(u); };
  const auto from_box = [](double v) {
    const double c = std::clamp(v / kArmaBox, -0.999999, 0.999999);
    return std::atanh(c);
  };
  const auto objective = [&](const std::vector<double>& u) {
    return css_objective(y, to_box(u[0]), to_box(u[1]));
  };

  // Start at the lag-1 autocorrelation with no MA part; a pure moment start
  // keeps the fit off the a = -b ridge where the model degenerates to noise.
  const double acf1 = std::clamp(lag1_autocorr(y), -0.95, 0.95);
  const NmResult best = nelder_mead(objective, {from_box(acf1), 0.0}, 0.3, 2000, 1e-13);
  if (!best.converged)
    throw numeric_error("fit_arma11: optimizer did not converge; last iterate ar=" +
                        std::to_string(to_box(best.x[0])) +
                        " ma=" + std::to_string(to_box(best.x[1])));
  const int total_iters = best.iterations;

  ArmaFit fit;
  fit.ar = to_box(best.x[0]);
  fit.ma = to_box(best.x[1]);
  fit.intercept = ybar;
  const double n_terms = static_cast<double>(y.size() - 1);
  fit.innovation_variance = best.fmin / n_terms;

  // On serially independent data the CSS surface is flat along the root
  // cancellation ridge ar = -ma and the minimizer lands at an arbitrary
  // point on it. Collapse to the white-noise fit unless the ARMA terms
  // improve on it by a significant likelihood ratio (chi^2_2 at 5%).
  const double sse0 = css_objective(y, 0.0, 0.0);
  if (best.fmin > 0.0 && n_terms * std::log(sse0 / best.fmin) < 5.99) {
    fit.ar = 0.0;
    fit.ma = 0.0;
    fit.innovation_variance = sse0 / n_terms;
  }
  fit.loglik =
      -0.5 * n_terms *
      (std::log(2.0 * 3.14159265358979323846 * fit.innovation_variance) + 1.0);
  fit.iterations = total_iters;
  fit.boundary_warning = std::fabs(fit.ar) > 0.99;
  if (!std::isfinite(best.fmin))
    throw numeric_error("fit_arma11: non-finite residual sum of squares");
  return fit;
}

double estimate_theta(const DailyMomentPanel& panel, double delta) {
  if (panel.size() < 1) throw std::invalid_argument("estimate_theta: empty panel");
  if (delta <= 0.0) throw std::invalid_argument("estimate_theta: delta must be > 0");
  return mean(panel.rv) / delta;
}

double estimate_kappa(const DailyMomentPanel& panel, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("estimate_kappa: delta must be > 0");
  const ArmaFit fit = fit_arma11(panel.rv);
  if (fit.ar <= 0.0)
    throw numeric_error("estimate_kappa: ARMA AR coefficient " +
                        std::to_string(fit.ar) + " is <= 0; kappa undefined");
  return -std::log(fit.ar) / delta;
}

double estimate_gamma(const DailyMomentPanel& panel, double delta,
                      double theta_hat, double kappa_hat,
                      std::vector<std::string>* warnings) {
  if (delta <= 0.0) throw std::invalid_argument("estimate_gamma: delta must be > 0");
  if (!(kappa_hat > 0.0))
    throw std::invalid_argument("estimate_gamma: kappa_hat must be > 0");
  if (panel.size() == 0) throw std::invalid_argument("estimate_gamma: empty panel");
  double mean_rv2 = 0.0;
  for (double v : panel.rv) mean_rv2 += v * v;
  mean_rv2 /= static_cast<double>(panel.size());

  const double num = mean_rv2 - theta_hat * theta_hat * delta * delta;
  const double scale = std::max(mean_rv2, 1e-300);
  if (num <= 1e-12 * scale) {
    if (num < -1e-12 * scale)
      throw numeric_error("estimate_gamma: negative variance-of-QV estimate");
    add_warning(warnings, "gamma_zero_numerator");
    return 0.0;
  }
  const double denom =
      (theta_hat / (kappa_hat * kappa_hat)) * detail::f_lag(kappa_hat, delta);
  if (!(denom > 0.0))
    throw numeric_error("estimate_gamma: non-positive denominator");
  return std::sqrt(num / denom);
}

double estimate_rho(const DailyMomentPanel& panel, double delta,
                    double theta_hat, double kappa_hat, double gamma_hat,
                    std::vector<std::string>* warnings) {
  if (delta <= 0.0) throw std::invalid_argument("estimate_rho: delta must be > 0");
  if (!(kappa_hat > 0.0))
    throw std::invalid_argument("estimate_rho: kappa_hat must be > 0");
  const double num = mean(panel.tv);
  // (e^{-k d} - 1)/k + d  ==  d - (1 - e^{-k d})/k
  const double denom = (2.0 * gamma_hat * theta_hat / kappa_hat) *
                       detail::f_lag(kappa_hat, delta);
  if (denom == 0.0) {
    if (num == 0.0) {
      add_warning(warnings, "rho_zero_over_zero");
      return 0.0;
    }
    throw numeric_error("estimate_rho: zero denominator");
  }
  double rho = num / denom;
  if (rho > 1.0 || rho < -1.0) {
    add_warning(warnings, "rho_clamped_from_" + std::to_string(rho));
    rho = std::clamp(rho, -1.0, 1.0);
  }
  return rho;
}

HestonParams EstimationReport::params() const {
  HestonParams p;
  p.kappa = kappa;
  p.theta = theta;
  p.gamma = gamma;
  p.rho = rho;
  p.mu = 0.0;
  p.v0 = theta;
  p.validate();
  return p;
}

EstimationReport simple_estimate(const DailyMomentPanel& panel, double delta) {
  EstimationReport rep;
  rep.method = "simple";
  rep.m_days = static_cast<std::int64_t>(panel.size());
  rep.delta = delta;

  try {
    rep.theta = estimate_theta(panel, delta);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("simple_estimate[theta]: ") + e.what());
  }

  bool degenerate_rv = false;
  if (panel.size() >= 2) {
    const double sd = sample_sd(panel.rv);
    degenerate_rv = !(sd > 1e-12 * std::fabs(mean(panel.rv)));
  }

  if (degenerate_rv) {
    rep.warnings.push_back("degenerate_rv_series");
  } else {
    try {
      const ArmaFit fit = fit_arma11(panel.rv);
      rep.arma_ma = fit.ma;
      rep.iterations = fit.iterations;
      if (fit.boundary_warning) rep.warnings.push_back("arma_ar_near_boundary");
      if (fit.ar <= 0.0)
        throw numeric_error("ARMA AR coefficient " + std::to_string(fit.ar) +
                            " is <= 0; kappa undefined");
      rep.kappa = -std::log(fit.ar) / delta;
    } catch (const std::exception& e) {
      throw numeric_error(std::string("simple_estimate[kappa]: ") + e.what());
    }
  }

  try {
    // A flat rv series yields a zero numerator, so gamma resolves to 0
    // before kappa is ever needed.
    const double kappa_for_gamma = degenerate_rv ? 1.0 : rep.kappa;
    rep.gamma = estimate_gamma(panel, delta, rep.theta, kappa_for_gamma,
                               &rep.warnings);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("simple_estimate[gamma]: ") + e.what());
  }

  try {
    const double kappa_for_rho = degenerate_rv ? 1.0 : rep.kappa;
    rep.rho = estimate_rho(panel, delta, rep.theta, kappa_for_rho, rep.gamma,
                           &rep.warnings);
  } catch (const std::exception& e) {
    throw numeric_error(std::string("simple_estimate[rho]: ") + e.what());
  }

  rep.feller_ok = 2.0 * rep.kappa * rep.theta > rep.gamma * rep.gamma;
  rep.converged = true;
  return rep;
}

// ---------------------------------------------------------------------------
// GMM
// ---------------------------------------------------------------------------

GmmWindow gmm_window(const DailyMomentPanel& panel, std::size_t j) {
  if (j < 2 || j + 1 >= panel.size())
    throw std::invalid_argument("gmm_window: need rows j-2 .. j+1 in range");
  GmmWindow w;
  w.rv_m2 = panel.rv[j - 2];
  w.rv_m1 = panel.rv[j - 1];
  w.rv_0 = panel.rv[j];
  w.rv_p1 = panel.rv[j + 1];
  w.tv_m1 = panel.tv[j - 1];
  w.tv_0 = panel.tv[j];
  w.tv_p1 = panel.tv[j + 1];
  return w;
}

std::array<double, 6> gmm_moment_vector(const GmmConstants& gc,
                                        const GmmWindow& w) {
  // rv_p1 - a rv_0 - (1-a) theta delta; the intercept is b * delta.
  const double e_rv = w.rv_p1 - gc.a * w.rv_0 - gc.b * gc.delta;
  const double e_tv =
      w.tv_p1 - gc.a * w.tv_0 + gc.a * gc.beta3 - gc.alpha3 * gc.b - gc.beta3;
  const double e_rv2 = w.rv_p1 * w.rv_p1 - gc.c * w.rv_0 * w.rv_0 -
                       gc.F * w.rv_0 - gc.G;
  return {e_rv, e_rv * w.rv_m1, e_rv * w.rv_m2, e_tv, e_tv * w.tv_m1, e_rv2};
}

std::array<double, 6> gmm_moment_vector(const HestonParams& eta, double delta,
                                        const GmmWindow& w) {
  return gmm_moment_vector(gmm_constants(eta, delta), w);
}

namespace {

// Stacked moment observations; 6 base components, optionally 2 extra
// lagged-instrument components.
std::vector<std::vector<double>> gmm_observations(const GmmConstants& gc,
                                                  const DailyMomentPanel& panel,
                                                  bool extra) {
  const std::size_t m = panel.size();
  std::vector<std::vector<double>> obs;
  if (m < 4) return obs;
  obs.reserve(m - 3);
  for (std::size_t j = 2; j + 1 < m; ++j) {
    const GmmWindow w = gmm_window(panel, j);
    const std::array<double, 6> g = gmm_moment_vector(gc, w);
    std::vector<double> row(g.begin(), g.end());
    if (extra) {
      row.push_back(g[5] * w.rv_m1);  // rv^2 residual x lagged rv
      row.push_back(g[3] * w.rv_m1);  // tv residual x lagged rv
    }
    obs.push_back(std::move(row));
  }
  return obs;
}

std::vector<double> column_means(const std::vector<std::vector<double>>& obs) {
  const std::size_t k = obs.front().size();
  std::vector<double> m(k, 0.0);
  for (const auto& row : obs)
    for (std::size_t i = 0; i < k; ++i) m[i] += row[i];
  for (double& v : m) v /= static_cast<double>(obs.size());
  return m;
}

// Bartlett-kernel long-run covariance of the (centered) moment observations.
Matrix hac_covariance(const std::vector<std::vector<double>>& obs, int lag) {
  const std::size_t n = obs.size();
  const std::size_t k = obs.front().size();
  const std::vector<double> mu = column_means(obs);

  std::vector<std::vector<double>> c(n, std::vector<double>(k));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < k; ++i) c[t][i] = obs[t][i] - mu[i];

  Matrix s = zeros(k, k);
  for (int l = 0; l <= lag; ++l) {
    const double w = 1.0 - static_cast<double>(l) / (lag + 1.0);
    Matrix gl = zeros(k, k);
    for (std::size_t t = static_cast<std::size_t>(l); t < n; ++t)
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
          gl[i][j] += c[t][i] * c[t - static_cast<std::size_t>(l)][j];
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        gl[i][j] /= static_cast<double>(n);
        s[i][j] += (l == 0) ? gl[i][j] : w * (gl[i][j] + gl[j][i]);
      }
  }
  return s;
}

// g' S^{-1} g evaluated through a Cholesky factor of the diagonally scaled
// HAC matrix, so the quadratic form stays exactly non-negative despite the
// huge spread in moment-component scales.
struct HacWeight {
  std::vector<double> scale;  // sqrt(diag(S))
  Matrix chol_l;              // Cholesky of D^{-1} S D^{-1}
  bool ridged = false;

  double quad(const std::vector<double>& g) const {
    std::vector<double> z(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) z[i] = g[i] / scale[i];
    const std::vector<double> y = forward_solve(chol_l, z);
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
  }

  // Explicit W = S^{-1} for the sandwich covariance.
  Matrix full() const {
    const std::size_t n = scale.size();
    Matrix w = zeros(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> e(n, 0.0);
      e[j] = 1.0 / scale[j];
      const std::vector<double> y = forward_solve(chol_l, e);
      const std::vector<double> x = backward_solve_t(chol_l, y);
      for (std::size_t i = 0; i < n; ++i) w[i][j] = x[i] / scale[i];
    }
    return w;
  }
};

HacWeight make_hac_weight(Matrix s, std::vector<std::string>* warnings) {
  const std::size_t n = s.size();
  HacWeight w;
  w.scale.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    w.scale[i] = std::sqrt(std::max(s[i][i], 1e-300));
  Matrix scaled = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      scaled[i][j] = s[i][j] / (w.scale[i] * w.scale[j]);

  double ridge = 1e-10;
  while (!cholesky(scaled, &w.chol_l)) {
    if (ridge > 1e-4)
      throw numeric_error("gmm_estimate: HAC matrix not invertible even after ridge");
    for (std::size_t i = 0; i < n; ++i) scaled[i][i] += ridge;
    if (!w.ridged && warnings) warnings->push_back("hac_ridge_regularized");
    w.ridged = true;
    ridge *= 10.0;
  }
  return w;
}

struct EtaTransform {
  // kappa, theta, gamma positive via exp; rho in (-1,1) via tanh.
  static std::vector<double> to_u(const HestonParams& p) {
    return {std::log(p.kappa), std::log(p.theta), std::log(p.gamma),
            std::atanh(std::clamp(p.rho, -0.9999, 0.9999))};
  }
  static HestonParams to_eta(const std::vector<double>& u) {
    HestonParams p;
    p.kappa = std::exp(std::clamp(u[0], -30.0, 30.0));
    p.theta = std::exp(std::clamp(u[1], -30.0, 30.0));
    p.gamma = std::exp(std::clamp(u[2], -30.0, 30.0));
    p.rho = std::tanh(u[3]);
    p.mu = 0.0;
    p.v0 = p.theta;
    return p;
  }
};

}  // namespace

GmmMomentStats gmm_moment_stats(const HestonParams& eta, double delta,
                                const DailyMomentPanel& panel,
                                bool extra_instruments) {
  const GmmConstants gc = gmm_constants(eta, delta);
  const auto obs = gmm_observations(gc, panel, extra_instruments);
  if (obs.empty())
    throw std::invalid_argument("gmm_moment_stats: panel too short (need >= 4 rows)");
  GmmMomentStats out;
  out.n_obs = static_cast<std::int64_t>(obs.size());
  out.mean = column_means(obs);
  const std::size_t k = obs.front().size();
  out.se.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    double ss = 0.0;
    for (const auto& row : obs) {
      const double d = row[i] - out.mean[i];
      ss += d * d;
    }
    const double n = static_cast<double>(obs.size());
    out.se[i] = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

EstimationReport gmm_estimate(const DailyMomentPanel& panel, double delta,
                              const HestonParams& start,
                              const GmmOptions& opts) {
  if (panel.size() < 100)
    throw std::invalid_argument("gmm_estimate: need at least 100 panel rows");
  start.validate();

  EstimationReport rep;
  rep.method = "gmm";
  rep.m_days = static_cast<std::int64_t>(panel.size());
  rep.delta = delta;
  rep.start_kappa = start.kappa;
  rep.start_theta = start.theta;
  rep.start_gamma = start.gamma;
  rep.start_rho = start.rho;

  const bool extra = opts.use_extra_lag_instruments;
  const std::size_t dim = extra ? 8 : 6;

  const auto mean_moments = [&](const HestonParams& eta) {
    const GmmConstants gc = gmm_constants(eta, delta);
    const auto obs = gmm_observations(gc, panel, extra);
    return column_means(obs);
  };

  // Step 1: identity weight.
  const auto obj1 = [&](const std::vector<double>& u) {
    const std::vector<double> g = mean_moments(EtaTransform::to_eta(u));
    double s = 0.0;
    for (double v : g) s += v * v;
    return s;
  };
  const std::vector<double> u0 = EtaTransform::to_u(start);
  const double f0 = obj1(u0);
  NmResult step1 = nelder_mead(obj1, u0, 0.15, opts.max_iterations, opts.ftol_rel);
  if (step1.fmin > f0) {
    rep.warnings.push_back("step1_no_improvement");
    step1.x = u0;
    step1.fmin = f0;
  }

  // Step 2: inverse Bartlett-HAC weight at the step-1 optimum.
  const HestonParams eta1 = EtaTransform::to_eta(step1.x);
  const GmmConstants gc1 = gmm_constants(eta1, delta);
  const auto obs1 = gmm_observations(gc1, panel, extra);
  const int lag = static_cast<int>(std::floor(
      4.0 * std::pow(static_cast<double>(obs1.size()) / 100.0, 2.0 / 9.0)));
  const Matrix s = hac_covariance(obs1, std::max(0, lag));
  const HacWeight hac = make_hac_weight(s, &rep.warnings);

  const auto obj2 = [&](const std::vector<double>& u) {
    return hac.quad(mean_moments(EtaTransform::to_eta(u)));
  };
  const double f1w2 = obj2(step1.x);
  NmResult step2 = nelder_mead(obj2, step1.x, 0.05, opts.max_iterations, opts.ftol_rel);
  if (step2.fmin > f1w2) {
    rep.warnings.push_back("step2_no_improvement");
    step2.x = step1.x;
    step2.fmin = f1w2;
  }

  const HestonParams eta2 = EtaTransform::to_eta(step2.x);
  rep.kappa = eta2.kappa;
  rep.theta = eta2.theta;
  rep.gamma = eta2.gamma;
  rep.rho = eta2.rho;
  rep.gmm_objective = step2.fmin;
  rep.iterations = step1.iterations + step2.iterations;
  rep.converged = step1.converged && step2.converged;
  rep.feller_ok = 2.0 * rep.kappa * rep.theta > rep.gamma * rep.gamma;

  // Sandwich standard errors: (G' W G)^{-1} / n with W the step-2 weight and
  // G the central-difference Jacobian of the mean moments in raw parameters.
  const Matrix w2 = hac.full();
  const std::size_t n_obs = obs1.size();
  Matrix jac = zeros(dim, 4);
  const std::array<double, 4> base = {rep.kappa, rep.theta, rep.gamma, rep.rho};
  for (std::size_t k = 0; k < 4; ++k) {
    const double h = opts.jacobian_rel_step * std::max(std::fabs(base[k]), 1e-8);
    HestonParams lo = eta2, hi = eta2;
    double* lo_f = (k == 0) ? &lo.kappa : (k == 1) ? &lo.theta : (k == 2) ? &lo.gamma : &lo.rho;
    double* hi_f = (k == 0) ? &hi.kappa : (k == 1) ? &hi.theta : (k == 2) ? &hi.gamma : &hi.rho;
    *lo_f -= h;
    *hi_f += h;
    if (k == 3) {
      // rho lives in [-1,1]; shrink to a one-sided difference at the edge
      *lo_f = std::max(*lo_f, -1.0);
      *hi_f = std::min(*hi_f, 1.0);
    }
    lo.v0 = lo.theta;
    hi.v0 = hi.theta;
    const double spread = *hi_f - *lo_f;
    const std::vector<double> glo = mean_moments(lo);
    const std::vector<double> ghi = mean_moments(hi);
    for (std::size_t i = 0; i < dim; ++i)
      jac[i][k] = (ghi[i] - glo[i]) / spread;
  }
  const Matrix jt = transpose(jac);
  const Matrix a = matmul(jt, matmul(w2, jac));  // 4x4
  Matrix ainv;
  if (invert(a, &ainv)) {
    const double n = static_cast<double>(n_obs);
    const double v_kappa = ainv[0][0] / n;
    const double v_theta = ainv[1][1] / n;
    const double v_gamma = ainv[2][2] / n;
    const double v_rho = ainv[3][3] / n;
    rep.se_kappa = v_kappa > 0.0 ? std::sqrt(v_kappa) : 0.0;
    rep.se_theta = v_theta > 0.0 ? std::sqrt(v_theta) : 0.0;
    // the SE is reported for gamma^2
    rep.se_gamma_squared =
        v_gamma > 0.0 ? 2.0 * rep.gamma * std::sqrt(v_gamma) : 0.0;
    rep.se_rho = v_rho > 0.0 ? std::sqrt(v_rho) : 0.0;
  } else {
    rep.warnings.push_back("sandwich_matrix_singular");
  }
  return rep;
}

}  // namespace momvar
