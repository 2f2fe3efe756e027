#pragma once

// Independent reference computations for the acceptance criteria. Nothing
// here calls into the library under test.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oracle {

inline constexpr std::size_t kMaxSubpageSegment = 20;

// URLs drawn from a subpage regime and an article regime (each cut at three
// standard deviations), with the extreme value of each metric per regime
// recorded at construction time.
struct TwoRegimeSet {
  std::vector<std::string> urls;
  std::vector<bool> is_article;
  std::size_t max_sub_length = 0, min_art_length = SIZE_MAX;
  std::size_t max_sub_subpath = 0, min_art_subpath = SIZE_MAX;
  std::size_t max_sub_hyphens = 0, min_art_hyphens = SIZE_MAX;
};

TwoRegimeSet two_regime_urls(std::size_t n, std::uint64_t seed);

// Largest gap between the two empirical CDFs, evaluated at every sample point.
double ks_d_scan(const std::vector<double>& a, const std::vector<double>& b);

// Word vectors read straight from the text file.
using VectorTable = std::map<std::string, std::vector<double>>;
VectorTable read_vectors(const std::string& path);

// Subpage weight: cosine of the summed path-token vectors against the summed
// topic keyword vectors, divided by the token count. Tokens split on '/' and '-'.
double subpage_weight(const std::string& path, const std::vector<std::string>& keywords, const VectorTable& vectors);

}  // namespace oracle
