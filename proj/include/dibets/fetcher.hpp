#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dibets/url.hpp"

namespace dibets {

inline constexpr const char* kDefaultUserAgent =
    "Mozilla/5.0 (X11; Linux x86_64; rv:84.0) Gecko/20100101 Firefox/84.0";

struct FetchOptions {
  unsigned parallelism = 4;
  double timeout_seconds = 30.0;
  unsigned retries = 2;
  double retry_backoff_seconds = 0.1;  // times the attempt number
  std::string user_agent = kDefaultUserAgent;
  bool respect_robots = false;
};

/// Outcome of one URL. Either status+body (2xx/3xx resolved) or error is set.
struct FetchResult {
  PageUrl url;
  std::optional<int> status;
  std::string body;
  std::string fetched_at;  // ISO-8601 UTC
  std::optional<std::string> error;

  bool ok() const { return status.has_value() && !error.has_value(); }
};

/// Fetches every URL with at most `parallelism` requests in flight. Redirects
/// are followed (up to 10). Failures (4xx/5xx, timeouts after retries,
/// robots exclusions) are recorded per URL and never abort the batch. Output
/// order matches input order.
std::vector<FetchResult> fetch_all(const std::vector<PageUrl>& urls, const FetchOptions& options);

/// One line of a snapshot index.
struct SnapshotEntry {
  std::string url;
  std::string path;  // relative to the snapshot directory; empty on error
  std::optional<int> status;
  std::string fetched_at;
  std::optional<std::string> error;
};

/// Stores each successful body as pages/<sha256 of body>.html under `dir` and
/// writes dir/index.jsonl. Returns the index path.
std::filesystem::path write_snapshots(const std::vector<FetchResult>& results, const std::filesystem::path& dir);

std::vector<SnapshotEntry> read_snapshot_index(const std::filesystem::path& index_path);
std::string snapshot_index_jsonl(const std::vector<SnapshotEntry>& entries);

// Minimal robots.txt evaluation: the "*" group (or one naming `agent`), Disallow/Allow prefixes.
bool robots_allows(std::string_view robots_txt, std::string_view agent, std::string_view path);

}  // namespace dibets
