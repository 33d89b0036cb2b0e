#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace momvar {

struct NmResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex minimization. step sets the initial simplex edge per
// coordinate; stops when the simplex f-spread falls below
// ftol_rel * (|f_best| + ftol_abs_floor) or max_iter is reached.
template <class F>
NmResult nelder_mead(F&& f, const std::vector<double>& x0, double step,
                     int max_iter = 2000, double ftol_rel = 1e-12,
                     double ftol_abs_floor = 1e-300) {
  const std::size_t n = x0.size();
  const double alpha = 1.0, gamma = 2.0, beta = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> x(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) x[i + 1][i] += step;
  std::vector<double> fx(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fx[i] = f(x[i]);

  NmResult out;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    // order: 0 best ... n worst
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    {
      std::vector<std::vector<double>> xs(n + 1);
      std::vector<double> fs(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        xs[i] = x[idx[i]];
        fs[i] = fx[idx[i]];
      }
      x.swap(xs);
      fx.swap(fs);
    }

    if (std::fabs(fx[n] - fx[0]) <=
        ftol_rel * (std::fabs(fx[0]) + ftol_abs_floor)) {
      out.converged = true;
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) centroid[k] += x[i][k];
    for (std::size_t k = 0; k < n; ++k) centroid[k] /= static_cast<double>(n);

    auto blend = [&](const std::vector<double>& from, double coef) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k)
        p[k] = centroid[k] + coef * (from[k] - centroid[k]);
      return p;
    };

    const std::vector<double> xr = blend(x[n], -alpha);
    const double fr = f(xr);
    if (fr < fx[0]) {
      const std::vector<double> xe = blend(x[n], -alpha * gamma);
      const double fe = f(xe);
      if (fe < fr) {
        x[n] = xe;
        fx[n] = fe;
      } else {
        x[n] = xr;
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      x[n] = xr;
      fx[n] = fr;
    } else {
      const bool outside = fr < fx[n];
      const std::vector<double> xc = blend(outside ? xr : x[n], beta);
      const double fc = f(xc);
      if (fc < (outside ? fr : fx[n])) {
        x[n] = xc;
        fx[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k)
            x[i][k] = x[0][k] + sigma * (x[i][k] - x[0][k]);
          fx[i] = f(x[i]);
        }
      }
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i)
    if (fx[i] < fx[best]) best = i;
  out.x = x[best];
  out.fmin = fx[best];
  out.iterations = iter;
  return out;
}

}  // namespace momvar
