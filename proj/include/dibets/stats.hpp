#pragma once

#include <span>
#include <string>
#include <vector>

namespace dibets::stats {

struct KsResult {
  double d_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// (effective n = n1*n2/(n1+n2), Stephens' correction on lambda, series
/// truncated at 100 terms). Throws EmptySample.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Q_KS(lambda) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2); 1 when the series does not settle.
double kolmogorov_q(double lambda);

/// Cohen's kappa for two raters. Degenerate chance agreement (p_e = 1) gives
/// 1 when the raters agree everywhere, else 0.
double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b);

struct Summary {
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
};

/// Order statistics with linearly interpolated quartiles. Throws EmptyInput.
Summary summary(std::span<const double> values);

// Linear-interpolation quantile on sorted data, p in [0,1].
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace dibets::stats
