#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "kramers/errors.hpp"

namespace kramers::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

struct Options {
  double abs_tol = 1e-14;
  double rel_tol = 1e-11;
  int max_intervals = 4000;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over the finite [a, b].
template <typename F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  if (a == b) return {};
  std::priority_queue<detail::Segment> heap;
  auto first = detail::kronrod15(f, a, b);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  int intervals = 1;
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (intervals >= opt.max_intervals) {
      // Underflow-level residuals are not worth reporting.
      if (error <= 1e-8 * std::max(1.0, std::abs(total))) break;
      fail(ErrorKind::kNumericalFailure,
           "quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
               "], estimate " + std::to_string(total) + " +- " + std::to_string(error));
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::kronrod15(f, worst.a, mid);
    const auto right = detail::kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Recompute from the leaves to shed accumulated cancellation.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, intervals};
}

/// Integral of f over [a, inf) with q = a + tan(theta).
template <typename F>
Result integrate_to_infinity(F&& f, double a, const Options& opt = {}) {
  auto mapped = [&](double theta) {
    const double c = std::cos(theta);
    if (c <= 0.0) return 0.0;
    const double value = f(a + std::tan(theta));
    return value == 0.0 ? 0.0 : value / (c * c);
  };
  return integrate(mapped, 0.0, 0.5 * 3.14159265358979323846, opt);
}

}  // namespace kramers::quadrature
