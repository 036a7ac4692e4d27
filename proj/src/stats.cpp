#include "gelk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gelk/error.hpp"

namespace gelk {

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double p_from(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_q((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, p_from(d, na * nb / (na + nb))};
}

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("KS test needs a nonempty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double f = cdf(samples[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return {d, p_from(d, n)};
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace gelk
