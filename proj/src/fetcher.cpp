#include "dibets/fetcher.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <ctime>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "dibets/error.hpp"
#include "dibets/html.hpp"
#include "dibets/io.hpp"

namespace dibets {
namespace {

using json = nlohmann::json;

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// "https://host:port" and "/path/" of a normalized URL.
std::pair<std::string, std::string> split_origin(const std::string& normalized) {
  std::size_t scheme_end = normalized.find("://");
  std::size_t path_start = normalized.find('/', scheme_end + 3);
  return {normalized.substr(0, path_start), normalized.substr(path_start)};
}

std::unique_ptr<httplib::Client> make_client(const std::string& origin, const FetchOptions& options) {
  auto client = std::make_unique<httplib::Client>(origin);
  auto secs = static_cast<time_t>(options.timeout_seconds);
  auto usecs = static_cast<time_t>((options.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client->set_connection_timeout(secs, usecs);
  client->set_read_timeout(secs, usecs);
  client->set_write_timeout(secs, usecs);
  client->set_follow_location(true);
  client->set_default_headers({{"User-Agent", options.user_agent},
                               {"Accept", "text/html,application/xhtml+xml;q=0.9,*/*;q=0.8"}});
  client->enable_server_certificate_verification(false);
  return client;
}

class RobotsCache {
 public:
  explicit RobotsCache(const FetchOptions& options) : options_(options) {}

  bool allowed(const std::string& origin, const std::string& path) {
    std::string rules;
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find(origin);
      if (it != cache_.end()) return robots_allows(it->second, options_.user_agent, path);
    }
    auto client = make_client(origin, options_);
    if (auto res = client->Get("/robots.txt"); res && res->status == 200) rules = res->body;
    {
      std::lock_guard lock(mutex_);
      cache_.emplace(origin, rules);
    }
    return robots_allows(rules, options_.user_agent, path);
  }

 private:
  const FetchOptions& options_;
  std::mutex mutex_;
  std::map<std::string, std::string> cache_;
};

FetchResult fetch_one(const PageUrl& url, const FetchOptions& options, RobotsCache& robots) {
  FetchResult result;
  result.url = url;
  auto [origin, path] = split_origin(url.normalized);
  if (options.respect_robots && !robots.allowed(origin, path)) {
    result.fetched_at = utc_now();
    result.error = "disallowed by robots.txt";
    return result;
  }
  std::string last_error;
  for (unsigned attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0 && options.retry_backoff_seconds > 0)
      std::this_thread::sleep_for(std::chrono::duration<double>(options.retry_backoff_seconds * attempt));
    auto client = make_client(origin, options);
    auto res = client->Get(path);
    result.fetched_at = utc_now();
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 400) {
      result.status = res->status;
      result.body = html::sanitize_utf8(res->body);
      result.error.reset();
      return result;
    }
    last_error = "HTTP " + std::to_string(res->status);
    // Client errors are final; only server errors are retried.
    if (res->status < 500) break;
  }
  result.error = last_error;
  return result;
}

}  // namespace

std::vector<FetchResult> fetch_all(const std::vector<PageUrl>& urls, const FetchOptions& options) {
  if (options.parallelism < 1) throw Error(Errc::InvalidArgument, "parallelism must be >= 1");
  if (!(options.timeout_seconds > 0)) throw Error(Errc::InvalidArgument, "timeout must be > 0");

  std::vector<FetchResult> results(urls.size());
  std::atomic<std::size_t> next{0};
  RobotsCache robots(options);
  auto worker = [&] {
    for (std::size_t i = next++; i < urls.size(); i = next++) {
      try {
        results[i] = fetch_one(urls[i], options, robots);
      } catch (const std::exception& e) {
        results[i].url = urls[i];
        results[i].fetched_at = utc_now();
        results[i].error = e.what();
      }
    }
  };
  std::size_t n_workers = std::min<std::size_t>(options.parallelism, std::max<std::size_t>(urls.size(), 1));
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return results;
}

std::string snapshot_index_jsonl(const std::vector<SnapshotEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    json j;
    j["url"] = e.url;
    j["path"] = e.path;
    j["status"] = e.status ? json(*e.status) : json(nullptr);
    j["fetched_at"] = e.fetched_at;
    j["error"] = e.error ? json(*e.error) : json(nullptr);
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::filesystem::path write_snapshots(const std::vector<FetchResult>& results, const std::filesystem::path& dir) {
  std::vector<SnapshotEntry> entries;
  for (const auto& r : results) {
    SnapshotEntry e{r.url.normalized, {}, r.status, r.fetched_at, r.error};
    if (r.ok()) {
      e.path = "pages/" + io::sha256_hex(r.body) + ".html";
      std::filesystem::path target = dir / e.path;
      if (!std::filesystem::exists(target)) io::write_file(target, r.body);
    }
    entries.push_back(std::move(e));
  }
  std::filesystem::path index = dir / "index.jsonl";
  io::write_file(index, snapshot_index_jsonl(entries));
  return index;
}

std::vector<SnapshotEntry> read_snapshot_index(const std::filesystem::path& index_path) {
  std::string text = io::read_file(index_path);
  std::vector<SnapshotEntry> out;
  for (auto [no, line] : io::lines(text)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("url")) {
      throw Error(Errc::MalformedDocument,
                  index_path.string() + ":" + std::to_string(no) + ": not a snapshot index row");
    }
    SnapshotEntry e;
    e.url = j["url"].get<std::string>();
    if (j.contains("path") && j["path"].is_string()) e.path = j["path"].get<std::string>();
    if (j.contains("status") && j["status"].is_number_integer()) e.status = j["status"].get<int>();
    if (j.contains("fetched_at") && j["fetched_at"].is_string()) e.fetched_at = j["fetched_at"].get<std::string>();
    if (j.contains("error") && j["error"].is_string()) e.error = j["error"].get<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

bool robots_allows(std::string_view robots_txt, std::string_view agent, std::string_view path) {
  auto lower = [](std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
  };
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  std::string agent_lc = lower(agent);
  // Rules from the most specific matching group; "*" otherwise.
  std::vector<std::pair<bool, std::string>> star_rules, named_rules;
  bool in_star = false, in_named = false, last_was_agent = false;
  for (auto [no, line] : io::lines(robots_txt)) {
    (void)no;
    std::string_view l = line.substr(0, line.find('#'));
    auto colon = l.find(':');
    if (colon == std::string_view::npos) continue;
    std::string key = lower(trim(l.substr(0, colon)));
    std::string_view value = trim(l.substr(colon + 1));
    if (key == "user-agent") {
      if (!last_was_agent) in_star = in_named = false;
      std::string v = lower(value);
      if (v == "*") in_star = true;
      else if (!v.empty() && agent_lc.find(v) != std::string::npos) in_named = true;
      last_was_agent = true;
      continue;
    }
    last_was_agent = false;
    if (key != "disallow" && key != "allow") continue;
    std::pair<bool, std::string> rule{key == "allow", std::string(value)};
    if (in_named) named_rules.push_back(rule);
    if (in_star) star_rules.push_back(rule);
  }
  const auto& rules = named_rules.empty() ? star_rules : named_rules;
  // Longest matching prefix decides; empty Disallow allows everything.
  std::size_t best_len = 0;
  bool allowed = true;
  for (const auto& [allow, prefix] : rules) {
    if (prefix.empty()) continue;
    if (path.starts_with(prefix) && prefix.size() >= best_len) {
      if (prefix.size() > best_len || allow) allowed = allow;
      best_len = prefix.size();
    }
  }
  return allowed;
}

}  // namespace dibets
