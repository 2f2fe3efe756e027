#include "dibets/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "dibets/error.hpp"

namespace dibets::stats {

double kolmogorov_q(double lambda) {
  const double a2 = -2.0 * lambda * lambda;
  double sum = 0.0, sign = 1.0, prev_term = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = sign * 2.0 * std::exp(a2 * k * k);
    sum += term;
    if (std::fabs(term) <= 1e-3 * prev_term || std::fabs(term) <= 1e-8 * sum) {
      return std::clamp(sum, 0.0, 1.0);
    }
    sign = -sign;
    prev_term = std::fabs(term);
  }
  // Only reached for tiny lambda, where the true value is 1.
  return 1.0;
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptySample, "KS test needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  KsResult r;
  r.d_statistic = d;
  r.n1 = x.size();
  r.n2 = y.size();
  const double en = std::sqrt(n1 * n2 / (n1 + n2));
  r.p_value = d == 0.0 ? 1.0 : kolmogorov_q((en + 0.12 + 0.11 / en) * d);
  return r;
}

double cohens_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "rater label lists differ in length");
  if (a.empty()) throw Error(Errc::EmptyInput, "no labels");
  const double n = static_cast<double>(a.size());
  std::map<std::string, double> ma, mb;
  double agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1;
    mb[b[i]] += 1;
    if (a[i] == b[i]) agree += 1;
  }
  const double po = agree / n;
  double pe = 0;
  for (const auto& [label, count] : ma) {
    auto it = mb.find(label);
    if (it != mb.end()) pe += (count / n) * (it->second / n);
  }
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(Errc::EmptyInput, "quantile of nothing");
  double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Summary summary(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::EmptyInput, "summary of no values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  Summary s;
  s.count = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return s;
}

}  // namespace dibets::stats
