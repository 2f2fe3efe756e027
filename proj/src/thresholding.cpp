#include "dibets/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "dibets/error.hpp"
#include "dibets/io.hpp"

namespace dibets {

Histogram::Histogram(double bucket_size, std::map<std::int64_t, std::size_t> counts)
    : bucket_size_(bucket_size), counts_(std::move(counts)) {
  if (!(bucket_size_ > 0)) throw Error(Errc::InvalidArgument, "bucket size must be positive");
}

std::size_t Histogram::total() const {
  std::size_t n = 0;
  for (const auto& [_, c] : counts_) n += c;
  return n;
}

std::string Histogram::to_csv() const {
  std::string out = "bucket,count\n";
  if (counts_.empty()) return out;
  for (std::int64_t i = counts_.begin()->first; i <= counts_.rbegin()->first; ++i) {
    auto it = counts_.find(i);
    out += io::format_double(bucket_start(i)) + "," + std::to_string(it == counts_.end() ? 0 : it->second) + "\n";
  }
  return out;
}

Histogram build_histogram(std::span<const double> values, double bucket_size) {
  if (values.empty()) throw Error(Errc::EmptyInput, "histogram of no values");
  if (!(bucket_size > 0)) throw Error(Errc::InvalidArgument, "bucket size must be positive");
  std::map<std::int64_t, std::size_t> counts;
  for (double v : values) {
    // The epsilon keeps values such as 0.15/0.05 = 2.9999999999999996 in their bucket.
    auto index = static_cast<std::int64_t>(std::floor(v / bucket_size + 1e-9));
    ++counts[index];
  }
  return Histogram(bucket_size, std::move(counts));
}

namespace {

struct Mode {
  std::size_t peak;       // dense index
  std::size_t height;
  double mass;            // volume above the saddle where it merged (total for the global mode)
};

// Topological persistence over the dense histogram: buckets are added in
// decreasing count order; when two components meet, the lower peak dies and
// its volume above the meeting level is recorded. Noise spikes die with tiny
// volume; genuine modes die at the valley with most of their mass.
std::vector<Mode> find_modes(const std::vector<std::size_t>& c) {
  const std::size_t n = c.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c[a] > c[b]; });

  std::vector<std::size_t> parent(n);
  std::vector<bool> added(n, false);
  std::vector<std::size_t> peak(n), members(n, 0);
  std::vector<double> sum(n, 0.0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<Mode> modes;
  for (std::size_t i : order) {
    added[i] = true;
    parent[i] = i;
    peak[i] = i;
    members[i] = 1;
    sum[i] = static_cast<double>(c[i]);
    for (std::size_t nb : {i - 1, i + 1}) {
      if (nb >= n || !added[nb]) continue;  // i - 1 wraps for i == 0
      std::size_t a = find(i), b = find(nb);
      if (a == b) continue;
      // Exactly one side can be a singleton holding only i; that is growth, not a merge.
      bool a_is_new = members[a] == 1 && peak[a] == i;
      if (!a_is_new) {
        std::size_t level = c[i];
        auto volume = [&](std::size_t r) {
          return sum[r] - static_cast<double>(level) * static_cast<double>(members[r]);
        };
        // The lower peak dies; ties kill the component to the right.
        std::size_t pa = peak[a], pb = peak[b];
        bool a_dies = c[pa] < c[pb] || (c[pa] == c[pb] && pa > pb);
        std::size_t dead = a_dies ? a : b;
        std::size_t alive = a_dies ? b : a;
        // i was already counted in a; exclude it from the dead volume if it belongs there.
        double dead_volume = volume(dead);
        if (dead == a) dead_volume -= static_cast<double>(c[i]) - static_cast<double>(level);
        modes.push_back({peak[dead], c[peak[dead]], dead_volume});
        parent[dead] = alive;
        members[alive] += members[dead];
        sum[alive] += sum[dead];
      } else {
        parent[a] = b;
        members[b] += 1;
        sum[b] += sum[a];
      }
    }
  }
  if (n > 0) {
    std::size_t root = find(0);
    modes.push_back({peak[root], c[peak[root]], sum[root]});
  }
  return modes;
}

}  // namespace

double find_bimodal_threshold(const Histogram& h) {
  const auto& counts = h.counts();
  if (counts.empty()) throw Error(Errc::NotBimodal, "empty histogram");
  const std::int64_t lo = counts.begin()->first;
  const std::int64_t hi = counts.rbegin()->first;
  if (hi - lo + 1 < 3) throw Error(Errc::NotBimodal, "histogram spans fewer than 3 buckets");

  std::vector<std::size_t> dense(static_cast<std::size_t>(hi - lo + 1), 0);
  for (const auto& [index, count] : counts) dense[static_cast<std::size_t>(index - lo)] = count;

  const double total = static_cast<double>(h.total());
  std::vector<Mode> modes = find_modes(dense);
  std::erase_if(modes, [&](const Mode& m) { return m.height == 0 || m.mass < kMinModeMass * total; });
  if (modes.size() < 2) throw Error(Errc::NotBimodal, "fewer than two significant modes");
  // Most persistent first: a narrow regime can throw up two tall noise peaks
  // that outrank a broad regime's peak by height but not by volume.
  std::stable_sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.height != b.height ? a.height > b.height : a.peak < b.peak;
  });

  std::size_t left = std::min(modes[0].peak, modes[1].peak);
  std::size_t right = std::max(modes[0].peak, modes[1].peak);
  if (right - left < 2) throw Error(Errc::NotBimodal, "modes are adjacent");
  std::size_t floor = *std::min_element(dense.begin() + static_cast<std::ptrdiff_t>(left) + 1,
                                        dense.begin() + static_cast<std::ptrdiff_t>(right));
  // Tied minima: the widest run of consecutive minimum buckets is the valley
  // floor (stray empty buckets in a sparse tail are not), and within it the
  // largest bucket wins. Equal widths also go to the larger value.
  std::size_t valley = left + 1, best_width = 0;
  for (std::size_t i = left + 1; i < right;) {
    if (dense[i] != floor) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end + 1 < right && dense[end + 1] == floor) ++end;
    if (end - i + 1 >= best_width) {
      best_width = end - i + 1;
      valley = end;
    }
    i = end + 1;
  }
  return h.bucket_start(lo + static_cast<std::int64_t>(valley) + 1);
}

ThresholdFit fit_thresholds(std::span<const PageUrl> train_urls, const BucketSizes& buckets,
                            bool fallback_defaults, const Thresholds& base) {
  if (train_urls.empty()) throw Error(Errc::EmptyInput, "no training URLs");
  std::vector<double> lengths, subpaths, hyphens;
  for (const auto& u : train_urls) {
    UrlMetrics m = url_metrics(u);
    lengths.push_back(static_cast<double>(m.url_length));
    subpaths.push_back(static_cast<double>(m.max_subpath_length));
    hyphens.push_back(static_cast<double>(m.max_hyphens));
  }
  ThresholdFit fit{base, build_histogram(lengths, buckets.url_length),
                   build_histogram(subpaths, buckets.subpath_length), build_histogram(hyphens, buckets.hyphens), {}};

  auto solve = [&](const Histogram& h, const char* name, std::size_t fallback) -> std::size_t {
    try {
      return static_cast<std::size_t>(std::llround(find_bimodal_threshold(h)));
    } catch (const Error& e) {
      if (!fallback_defaults || e.code() != Errc::NotBimodal) {
        throw Error(e.code(), std::string(name) + ": " + e.what());
      }
      fit.fallbacks.emplace_back(name);
      return fallback;
    }
  };
  fit.thresholds.max_url_length = solve(fit.url_length, "max_url_length", kDefaultThresholds.max_url_length);
  fit.thresholds.max_subpath_length =
      solve(fit.subpath_length, "max_subpath_length", kDefaultThresholds.max_subpath_length);
  fit.thresholds.max_hyphens = solve(fit.hyphens, "max_hyphens", kDefaultThresholds.max_hyphens);
  return fit;
}

bool passes(const PageUrl& u, const Thresholds& t) {
  UrlMetrics m = url_metrics(u);
  return m.url_length <= t.max_url_length && m.max_subpath_length <= t.max_subpath_length &&
         m.max_hyphens <= t.max_hyphens;
}

std::vector<PageUrl> filter_subpages(std::span<const PageUrl> urls, const Thresholds& t) {
  std::vector<PageUrl> out;
  std::copy_if(urls.begin(), urls.end(), std::back_inserter(out), [&](const PageUrl& u) { return passes(u, t); });
  return out;
}

double fit_cosine_cutoff(std::span<const double> max_scores, double bucket_size, bool fallback_defaults) {
  for (double s : max_scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw Error(Errc::InvalidArgument, "cosine scores must lie in [0,1]");
  }
  try {
    return find_bimodal_threshold(build_histogram(max_scores, bucket_size));
  } catch (const Error& e) {
    if (fallback_defaults && (e.code() == Errc::NotBimodal || e.code() == Errc::EmptyInput)) {
      return kDefaultThresholds.cosine_cutoff;
    }
    throw;
  }
}

std::string thresholds_to_json(const Thresholds& t) {
  nlohmann::ordered_json j;
  j["max_url_length"] = t.max_url_length;
  j["max_subpath_length"] = t.max_subpath_length;
  j["max_hyphens"] = t.max_hyphens;
  j["cosine_cutoff"] = t.cosine_cutoff;
  return j.dump(2) + "\n";
}

Thresholds thresholds_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::MalformedDocument, "thresholds file is not a JSON object");
  Thresholds t;
  try {
    t.max_url_length = j.at("max_url_length").get<std::size_t>();
    t.max_subpath_length = j.at("max_subpath_length").get<std::size_t>();
    t.max_hyphens = j.at("max_hyphens").get<std::size_t>();
    t.cosine_cutoff = j.at("cosine_cutoff").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedDocument, std::string("thresholds: ") + e.what());
  }
  if (t.max_url_length == 0 || t.max_subpath_length == 0 || t.max_hyphens == 0 ||
      !(t.cosine_cutoff >= 0.0 && t.cosine_cutoff <= 1.0)) {
    throw Error(Errc::MalformedDocument, "thresholds out of range");
  }
  return t;
}

}  // namespace dibets
