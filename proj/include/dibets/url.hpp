#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dibets/public_suffix.hpp"

namespace dibets {

/// A normalized absolute http(s) URL.
///
/// `normalized` is rebuilt from scheme, host, port and the non-empty path
/// segments, always ends in "/", and carries no query or fragment. `domain` is
/// the registrable domain (eTLD+1) of the host.
struct PageUrl {
  std::string raw;
  std::string normalized;
  std::string domain;
  std::string host;
  std::vector<std::string> subpaths;

  bool is_homepage() const { return subpaths.empty(); }
  bool operator==(const PageUrl& other) const { return normalized == other.normalized; }
};

struct LinkPartition {
  std::vector<PageUrl> internal;
  std::vector<PageUrl> external;
  std::size_t skipped = 0;  // hrefs that failed to parse
};

struct UrlMetrics {
  std::size_t url_length = 0;
  std::size_t max_subpath_length = 0;
  std::size_t max_hyphens = 0;

  bool operator==(const UrlMetrics&) const = default;
};

/// Parses `raw`, resolving it against `base` when relative. Throws
/// Error(MalformedUrl) when no http(s) URL can be formed.
PageUrl normalize(std::string_view raw, const PageUrl* base = nullptr,
                  const PublicSuffixList& psl = PublicSuffixList::builtin());

inline PageUrl normalize(std::string_view raw, const PageUrl& base,
                         const PublicSuffixList& psl = PublicSuffixList::builtin()) {
  return normalize(raw, &base, psl);
}

/// Collects every href attribute value in `html`, resolves it against `base` and
/// splits the result by registrable domain. Fragment-only, javascript: and
/// mailto: references are ignored; output is deduplicated in first-seen order.
LinkPartition extract_links(std::string_view html, const PageUrl& base,
                            const PublicSuffixList& psl = PublicSuffixList::builtin());

UrlMetrics url_metrics(const PageUrl& u);

// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);

/// A URL together with the homepage domain it was harvested from; one row of a
/// URL list file.
struct SiteUrl {
  PageUrl url;
  std::string site;
};

std::string to_jsonl(const std::vector<SiteUrl>& rows);
/// Accepts JSON Lines rows ({"raw","normalized",...,"site"}) or bare URLs, one
/// per line. Bare URLs get their own domain as site.
std::vector<SiteUrl> parse_url_list(std::string_view text,
                                    const PublicSuffixList& psl = PublicSuffixList::builtin());

}  // namespace dibets
