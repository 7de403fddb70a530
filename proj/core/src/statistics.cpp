#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "paragram/error.hpp"
#include "paragram/evaluation.hpp"

namespace paragram {

double cosine_similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw DataError("cosine of vectors with dimensions " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
  return similarity(u, v, Similarity::kCosine);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 share ranks i+1..j.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("correlation of lists with lengths " + std::to_string(x.size()) + " and " +
                    std::to_string(y.size()));
  }
  if (x.size() < 2) throw DataError("correlation needs at least two items");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("non-finite value in correlation input");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("correlation is undefined for a constant list");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DataError("spearman of lists with lengths " + std::to_string(x.size()) + " and " +
                    std::to_string(y.size()));
  }
  if (x.size() < 3) throw DataError("spearman needs at least three items");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw DataError("incomplete beta needs positive shape parameters");
  if (!(x >= 0.0 && x <= 1.0)) throw DataError("incomplete beta argument outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_upper_tail(double t, double df) {
  if (!(df > 0.0)) throw DataError("Student's t needs positive degrees of freedom");
  if (std::isnan(t)) throw DataError("Student's t of NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t >= 0.0 ? tail : 1.0 - tail;
}

SteigerResult steiger_test(double r13, double r23, double r12, long long n) {
  if (n < 4) throw DataError("dependent-correlation test needs n >= 4");
  for (double r : {r13, r23, r12}) {
    if (!(r > -1.0 && r < 1.0)) throw DataError("correlations must lie strictly inside (-1, 1)");
  }
  const double nn = static_cast<double>(n);
  const double det = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
  if (det <= 1e-12) throw DataError("degenerate correlation matrix");
  const double rbar = 0.5 * (r13 + r23);
  const double denom = 2.0 * ((nn - 1.0) / (nn - 3.0)) * det + rbar * rbar * std::pow(1.0 - r12, 3);
  SteigerResult out;
  out.t = (r13 - r23) * std::sqrt((nn - 1.0) * (1.0 + r12) / denom);
  out.p_one_tailed = student_t_upper_tail(out.t, nn - 3.0);
  return out;
}

double tuning_criterion(double rho_ws_s, double rho_ws_r) { return 2.0 * rho_ws_s - rho_ws_r; }

}  // namespace paragram
