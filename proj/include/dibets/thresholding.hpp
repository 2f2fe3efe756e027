#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dibets/url.hpp"

namespace dibets {

/// Frequency counts keyed by bucket index; bucket i covers [i*size, (i+1)*size).
class Histogram {
 public:
  Histogram(double bucket_size, std::map<std::int64_t, std::size_t> counts);

  double bucket_size() const { return bucket_size_; }
  const std::map<std::int64_t, std::size_t>& counts() const { return counts_; }
  double bucket_start(std::int64_t index) const { return static_cast<double>(index) * bucket_size_; }
  std::size_t total() const;

  // "bucket,count" rows over the dense span, zero buckets included.
  std::string to_csv() const;

 private:
  double bucket_size_;
  std::map<std::int64_t, std::size_t> counts_;
};

struct Thresholds {
  std::size_t max_url_length = 80;
  std::size_t max_subpath_length = 30;
  std::size_t max_hyphens = 4;
  double cosine_cutoff = 0.4;

  bool operator==(const Thresholds&) const = default;
};

inline constexpr Thresholds kDefaultThresholds{};

struct BucketSizes {
  double url_length = 1;
  double subpath_length = 5;
  double hyphens = 1;
  double cosine = 0.05;
};

Histogram build_histogram(std::span<const double> values, double bucket_size);

/// Minimum mass (fraction of the total) a mode must carry above its saddle.
inline constexpr double kMinModeMass = 0.05;

/// Locates the valley between the two most persistent significant modes
/// (largest volume above their saddle; height breaks ties) and returns
/// the upper edge of its lowest bucket. Among tied minima the widest run of
/// consecutive minimum buckets is taken, and its largest bucket. Throws
/// NotBimodal when fewer than two modes qualify.
double find_bimodal_threshold(const Histogram& h);

struct ThresholdFit {
  Thresholds thresholds;
  Histogram url_length;
  Histogram subpath_length;
  Histogram hyphens;
  std::vector<std::string> fallbacks;  // parameters that fell back to defaults
};

/// Fits the three URL thresholds. When `fallback_defaults` is false any
/// NotBimodal parameter is rethrown; otherwise that parameter takes its
/// default and is listed in `fallbacks`. cosine_cutoff keeps `base.cosine_cutoff`.
ThresholdFit fit_thresholds(std::span<const PageUrl> train_urls, const BucketSizes& buckets = {},
                            bool fallback_defaults = false, const Thresholds& base = kDefaultThresholds);

std::vector<PageUrl> filter_subpages(std::span<const PageUrl> urls, const Thresholds& t);
bool passes(const PageUrl& u, const Thresholds& t);

double fit_cosine_cutoff(std::span<const double> max_scores, double bucket_size = 0.05,
                         bool fallback_defaults = false);

std::string thresholds_to_json(const Thresholds& t);
Thresholds thresholds_from_json(std::string_view text);

}  // namespace dibets
