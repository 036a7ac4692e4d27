#pragma once

#include <functional>
#include <vector>

namespace gelk {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival function Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// One-sample test against a continuous CDF.
KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);

double mean(const std::vector<double>& v);
/// Sample standard deviation (n - 1 denominator).
double stddev(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace gelk
