#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "../support/synthetic.hpp"

namespace oracle {

namespace {

const std::string kBase = "https://ex.in/";
// Both regimes are cut at three standard deviations so no stray sample
// lands deep inside the other regime.
constexpr long kSubpageMaxLength = 35 + 3 * 8;
constexpr long kArticleMinLength = 130 - 3 * 15;

std::string letters(std::mt19937_64& rng, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('a' + rng() % 26);
  return s;
}

// A word run of exactly `len` characters containing exactly `hyphens`
// hyphens, none leading, trailing or adjacent.
std::string hyphenated(std::mt19937_64& rng, std::size_t len, std::size_t hyphens) {
  std::size_t letters_total = len - hyphens;
  std::size_t words = hyphens + 1;
  std::string out;
  for (std::size_t w = 0; w < words; ++w) {
    std::size_t share = letters_total / words + (w < letters_total % words ? 1 : 0);
    if (w) out += '-';
    out += letters(rng, share);
  }
  return out;
}

}  // namespace

TwoRegimeSet two_regime_urls(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TwoRegimeSet set;
  const std::size_t max_segment = kMaxSubpageSegment;
  for (std::size_t i = 0; i < n; ++i) {
    bool article = i % 2 == 1;
    std::string path;
    std::size_t seg_max = 0, hyph_max = 0;
    if (!article) {
      // redraw instead of clamping so no spike forms at the shortest length
      long target;
      do target = std::lround(testsupport::normal(rng, 35, 8));
      while (target < static_cast<long>(kBase.size()) + 2 || target > kSubpageMaxLength);
      auto length = static_cast<std::size_t>(target);
      std::size_t remaining = length - kBase.size();  // path characters after the base, slashes included
      bool first = true;
      while (remaining > 0) {
        std::size_t seg = std::min(remaining - 1, max_segment);
        if (remaining - 1 > max_segment && remaining - 1 - max_segment < 2) seg = remaining - 3;
        std::size_t h = 0;
        if (first && seg >= 5) h = std::min<std::size_t>(rng() % 3, (seg - 1) / 2);
        path += hyphenated(rng, seg, h) + "/";
        seg_max = std::max(seg_max, seg);
        hyph_max = std::max(hyph_max, h);
        remaining -= seg + 1;
        first = false;
      }
      set.max_sub_length = std::max(set.max_sub_length, length);
      set.max_sub_subpath = std::max(set.max_sub_subpath, seg_max);
      set.max_sub_hyphens = std::max(set.max_sub_hyphens, hyph_max);
    } else {
      std::size_t h = 5 + rng() % 5;
      long target;
      do target = std::lround(testsupport::normal(rng, 130, 15));
      while (target < kArticleMinLength);
      auto length = static_cast<std::size_t>(target);
      std::size_t seg = length - kBase.size() - 1;
      path = hyphenated(rng, seg, h) + "/";
      set.min_art_length = std::min(set.min_art_length, length);
      set.min_art_subpath = std::min(set.min_art_subpath, seg);
      set.min_art_hyphens = std::min(set.min_art_hyphens, h);
    }
    set.urls.push_back(kBase + path);
    set.is_article.push_back(article);
  }
  return set;
}

double ks_d_scan(const std::vector<double>& a, const std::vector<double>& b) {
  auto ecdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [&](double v) { return v <= x; })) /
           static_cast<double>(s.size());
  };
  double d = 0;
  for (const auto* s : {&a, &b})
    for (double x : *s) d = std::max(d, std::abs(ecdf(a, x) - ecdf(b, x)));
  return d;
}

VectorTable read_vectors(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  VectorTable table;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> v;
    for (double x; row >> x;) v.push_back(x);
    if (!token.empty()) table.emplace(token, v);
  }
  return table;
}

double subpage_weight(const std::string& path, const std::vector<std::string>& keywords, const VectorTable& vectors) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : path + "/") {
    if (ch == '/' || ch == '-') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (tokens.empty()) return 0.0;
  std::size_t dim = vectors.begin()->second.size();
  auto sum = [&](const std::vector<std::string>& words) {
    std::vector<double> s(dim, 0.0);
    for (const auto& w : words) {
      auto it = vectors.find(w);
      if (it == vectors.end()) continue;
      for (std::size_t i = 0; i < dim; ++i) s[i] += it->second[i];
    }
    return s;
  };
  auto a = sum(tokens), b = sum(keywords);
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < dim; ++i) dot += a[i] * b[i], na += a[i] * a[i], nb += b[i] * b[i];
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb) / static_cast<double>(tokens.size());
}

}  // namespace oracle
