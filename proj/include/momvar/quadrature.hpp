#pragma once

#include <cmath>
#include <queue>
#include <vector>

#include "momvar/errors.hpp"

namespace momvar {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
  int intervals = 0;
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1,1] (QUADPACK dqk15 tables).
inline constexpr double kGk15Nodes[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double kGk15WeightsK[8] = {
    0.02293532201052922, 0.06309209262997855, 0.1047900103222502,
    0.1406532597155259,  0.1690047266392679,  0.1903505780647854,
    0.2044329400752989,  0.2094821410847278};
// Gauss weights attach to the odd-index Kronrod nodes.
inline constexpr double kGk15WeightsG[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <class F>
void gk15(const F& f, double a, double b, double* value, double* err) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  const double f_mid = f(mid);
  double kron = kGk15WeightsK[7] * f_mid;
  double gauss = kGk15WeightsG[3] * f_mid;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kGk15Nodes[i];
    const double fsum = f(mid - dx) + f(mid + dx);
    kron += kGk15WeightsK[i] * fsum;
    if (i % 2 == 1) gauss += kGk15WeightsG[i / 2] * fsum;
  }
  kron *= half;
  gauss *= half;
  *value = kron;
  // QUADPACK-style sharpened error estimate.
  const double diff = std::fabs(kron - gauss);
  *err = diff * std::sqrt(diff) * 200.0;
  if (*err > diff) *err = diff;
  if (*err < 1e-300) *err = 1e-300;
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over [a,b]. Subdivides the
// interval with the largest error estimate until the summed error is below
// max(rel_tol*|integral|, abs_tol). Throws numeric_error (reporting the
// achieved tolerance) if max_intervals is exhausted first.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b,
                              double rel_tol = 1e-10, double abs_tol = 0.0,
                              int max_intervals = 2000) {
  QuadResult out;
  if (a == b) return out;

  struct Seg {
    double a, b, value, err;
    bool operator<(const Seg& o) const { return err < o.err; }
  };

  Seg first{a, b, 0.0, 0.0};
  detail::gk15(f, a, b, &first.value, &first.err);

  std::priority_queue<Seg> heap;
  heap.push(first);
  double total = first.value;
  double total_err = first.err;
  int n = 1;

  while (total_err > std::max(rel_tol * std::fabs(total), abs_tol)) {
    if (n + 1 > max_intervals) {
      throw numeric_error(
          "integrate_adaptive: interval budget exhausted; achieved abs error " +
          std::to_string(total_err) + " on integral " + std::to_string(total));
    }
    Seg worst = heap.top();
    heap.pop();
    total -= worst.value;
    total_err -= worst.err;

    const double mid = 0.5 * (worst.a + worst.b);
    Seg left{worst.a, mid, 0.0, 0.0};
    Seg right{mid, worst.b, 0.0, 0.0};
    detail::gk15(f, left.a, left.b, &left.value, &left.err);
    detail::gk15(f, right.a, right.b, &right.value, &right.err);
    total += left.value + right.value;
    total_err += left.err + right.err;
    heap.push(left);
    heap.push(right);
    ++n;
  }

  out.value = total;
  out.error = total_err;
  out.intervals = n;
  return out;
}

}  // namespace momvar
