#include "dibets/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>

#include <json.hpp>

#include "dibets/classifier.hpp"
#include "dibets/content.hpp"
#include "dibets/dictionary.hpp"
#include "dibets/embeddings.hpp"
#include "dibets/error.hpp"
#include "dibets/fetcher.hpp"
#include "dibets/io.hpp"
#include "dibets/public_suffix.hpp"
#include "dibets/stopwords.hpp"
#include "dibets/thresholding.hpp"
#include "dibets/tracking.hpp"
#include "dibets/url.hpp"

namespace dibets {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

const std::set<std::string> kPathKeys = {"dictionary", "embeddings",    "stopwords", "disconnect", "snapshot_dir",
                                         "crawl_logs", "public_suffix", "train_urls", "homepages",  "out_dir"};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(Errc::ConfigInvalid, key + ": cannot parse '" + value + "' as a number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(Errc::ConfigInvalid, key + ": expected true or false, got '" + value + "'");
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t end = value.find(',', pos);
    if (end == std::string::npos) end = value.size();
    std::string item = trim(std::string_view(value).substr(pos, end - pos));
    if (!item.empty()) out.push_back(item);
    pos = end + 1;
  }
  return out;
}

void apply(PipelineConfig& c, const std::string& key, const std::string& value, const fs::path& base) {
  if (kPathKeys.count(key)) {
    fs::path p = value;
    if (!value.empty() && p.is_relative() && !base.empty()) p = base / p;
    p = p.lexically_normal();
    if (key == "dictionary") c.dictionary = p;
    else if (key == "embeddings") c.embeddings = p;
    else if (key == "stopwords") c.stopwords = p;
    else if (key == "disconnect") c.disconnect = p;
    else if (key == "snapshot_dir") c.snapshot_dir = p;
    else if (key == "crawl_logs") c.crawl_logs = p;
    else if (key == "public_suffix") c.public_suffix = p;
    else if (key == "train_urls") c.train_urls = p;
    else if (key == "homepages") c.homepages = p;
    else c.out_dir = p;
    return;
  }
  using Z = std::size_t;
  if (key == "max_url_length") c.max_url_length = parse_number<Z>(key, value);
  else if (key == "max_subpath_length") c.max_subpath_length = parse_number<Z>(key, value);
  else if (key == "max_hyphens") c.max_hyphens = parse_number<Z>(key, value);
  else if (key == "cosine_cutoff") c.cosine_cutoff = parse_number<double>(key, value);
  else if (key == "fallback_defaults") c.fallback_defaults = parse_bool(key, value);
  else if (key == "fit_cosine") c.fit_cosine = parse_bool(key, value);
  else if (key == "top_sites") c.top_sites = parse_list(value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "parallel") c.parallel = parse_number<unsigned>(key, value);
  else if (key == "live") c.live = parse_bool(key, value);
  else if (key == "timeout") c.timeout = parse_number<double>(key, value);
  else if (key == "retries") c.retries = parse_number<unsigned>(key, value);
  else if (key == "pca_n") c.pca_n = parse_number<Z>(key, value);
  else if (key == "k") c.k = parse_number<Z>(key, value);
  else if (key == "restarts") c.restarts = parse_number<Z>(key, value);
  else if (key == "b_refs") c.b_refs = parse_number<Z>(key, value);
  else if (key == "min_df") c.min_df = parse_number<Z>(key, value);
  else if (key == "top_k") c.top_k = parse_number<Z>(key, value);
  else throw Error(Errc::ConfigInvalid, "unknown config key '" + key + "'");
}

json number_or_string(double v) {
  if (std::isfinite(v)) return v;
  return io::format_double(v);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "dictionary", "embeddings",  "stopwords",  "disconnect",    "snapshot_dir",       "crawl_logs",
      "public_suffix", "train_urls", "homepages", "out_dir",       "max_url_length",     "max_subpath_length",
      "max_hyphens", "cosine_cutoff", "fallback_defaults", "fit_cosine", "top_sites", "seed",
      "parallel",   "live",        "timeout",    "retries",       "pca_n",              "k",
      "restarts",   "b_refs",      "min_df",     "top_k"};
  return keys;
}

std::string env_name(const std::string& key) {
  std::string out = "DIBETS_";
  for (char ch : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v) return std::nullopt;
  return std::string(v);
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  for (auto [no, raw] : io::lines(text)) {
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == '[') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::ConfigInvalid, "line " + std::to_string(no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      std::size_t close = value.find('"', 1);
      if (close == std::string::npos) {
        throw Error(Errc::ConfigInvalid, "line " + std::to_string(no) + ": unterminated string");
      }
      value = value.substr(1, close - 1);
    } else if (std::size_t hash = value.find('#'); hash != std::string::npos) {
      value = trim(std::string_view(value).substr(0, hash));
    }
    if (key.empty()) throw Error(Errc::ConfigInvalid, "line " + std::to_string(no) + ": empty key");
    out[key] = value;
  }
  return out;
}

PipelineConfig load_config(const std::optional<fs::path>& file, const std::map<std::string, std::string>& overrides,
                           const EnvLookup& env) {
  PipelineConfig c;
  const auto& keys = config_keys();
  auto known = [&](const std::string& k) { return std::find(keys.begin(), keys.end(), k) != keys.end(); };
  if (file) {
    std::string text;
    try {
      text = io::read_file(*file);
    } catch (const Error& e) {
      throw Error(Errc::ConfigInvalid, "cannot read config " + file->string());
    }
    fs::path base = file->parent_path();
    for (const auto& [k, v] : parse_config_text(text)) {
      if (!known(k)) throw Error(Errc::ConfigInvalid, "unknown config key '" + k + "'");
      apply(c, k, v, base);
    }
  }
  if (env) {
    for (const auto& k : keys) {
      if (auto v = env(env_name(k))) apply(c, k, *v, {});
    }
  }
  for (const auto& [k, v] : overrides) {
    if (!known(k)) throw Error(Errc::ConfigInvalid, "unknown config key '" + k + "'");
    apply(c, k, v, {});
  }
  return c;
}

void validate_config(const PipelineConfig& c) {
  auto require = [](const fs::path& p, const char* key) {
    if (p.empty()) throw Error(Errc::ConfigInvalid, std::string(key) + " is required");
    if (!fs::exists(p)) throw Error(Errc::ConfigInvalid, std::string(key) + " does not exist: " + p.string());
  };
  auto optional_path = [](const fs::path& p, const char* key) {
    if (!p.empty() && !fs::exists(p)) {
      throw Error(Errc::ConfigInvalid, std::string(key) + " does not exist: " + p.string());
    }
  };
  require(c.dictionary, "dictionary");
  require(c.embeddings, "embeddings");
  if (c.live) {
    require(c.homepages, "homepages");
    if (c.snapshot_dir.empty()) throw Error(Errc::ConfigInvalid, "snapshot_dir is required");
  } else {
    require(c.snapshot_dir, "snapshot_dir");
    require(c.snapshot_dir / "index.jsonl", "snapshot_dir/index.jsonl");
  }
  optional_path(c.stopwords, "stopwords");
  optional_path(c.disconnect, "disconnect");
  optional_path(c.crawl_logs, "crawl_logs");
  optional_path(c.public_suffix, "public_suffix");
  optional_path(c.train_urls, "train_urls");
  if (c.out_dir.empty()) throw Error(Errc::ConfigInvalid, "out_dir is required");
  if (c.parallel < 1) throw Error(Errc::ConfigInvalid, "parallel must be >= 1");
  if (!(c.timeout > 0)) throw Error(Errc::ConfigInvalid, "timeout must be > 0");
  if (c.restarts < 1 || c.b_refs < 1 || c.pca_n < 1 || c.k < 1 || c.min_df < 1 || c.top_k < 1) {
    throw Error(Errc::ConfigInvalid, "restarts, b_refs, pca_n, k, min_df and top_k must be >= 1");
  }
  if (c.cosine_cutoff && !(*c.cosine_cutoff >= 0.0 && *c.cosine_cutoff <= 1.0)) {
    throw Error(Errc::ConfigInvalid, "cosine_cutoff must lie in [0,1]");
  }
}

std::string manifest_json(const std::vector<ManifestEntry>& entries) {
  ojson arr = ojson::array();
  for (const auto& e : entries) {
    ojson j;
    j["name"] = e.name;
    j["path"] = e.path;
    j["sha256"] = e.sha256;
    j["bytes"] = e.bytes;
    arr.push_back(std::move(j));
  }
  ojson root;
  root["artifacts"] = std::move(arr);
  return root.dump(2) + "\n";
}

std::vector<ManifestEntry> parse_manifest(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("artifacts") || !j["artifacts"].is_array()) {
    throw Error(Errc::MalformedDocument, "manifest must be an object with an artifacts array");
  }
  std::vector<ManifestEntry> out;
  for (const auto& a : j["artifacts"]) {
    out.push_back({a.at("name").get<std::string>(), a.at("path").get<std::string>(), a.at("sha256").get<std::string>(),
                   a.at("bytes").get<std::size_t>()});
  }
  return out;
}

ManifestEntry write_artifact(const fs::path& out_dir, const std::string& name, const std::string& relative,
                             const std::string& contents) {
  io::write_file(out_dir / relative, contents);
  return {name, relative, io::sha256_hex(contents), contents.size()};
}

std::string cluster_json(const LabeledMatrix& m, const ClusterSettings& s) {
  const std::size_t rows = m.rows.size();
  const std::size_t cols = m.columns.size();
  if (rows < 2 || cols < 1) {
    throw Error(Errc::InvalidArgument, "matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " is too small to cluster");
  }
  const std::size_t n = std::min(s.pca_n, std::min(rows - 1, cols));
  PcaResult pca = pca_fit(m.cells, n);
  KMeansOptions opts = s.kmeans;
  opts.k = std::min(opts.k, rows);
  ClusterReport rep = kmeans(pca.reduced, opts);
  try {
    rep.silhouette = silhouette(pca.reduced, rep.assignments);
  } catch (const Error& e) {
    if (e.code() != Errc::SingleCluster) throw;
  }
  rep.gap = gap_statistic(pca.reduced, opts, s.b_refs);

  ojson j;
  j["rows"] = m.rows;
  j["pca_n_requested"] = s.pca_n;
  j["pca_n"] = pca.model.components.cols();
  j["rank_limited"] = pca.model.rank_limited;
  j["explained_variance_ratio"] = pca.model.explained_variance_ratio;
  j["k"] = rep.k;
  j["seed"] = rep.seed;
  j["restarts"] = opts.restarts;
  j["gap_reference"] = "uniform over bounding box";
  ojson assign = ojson::object();
  for (std::size_t i = 0; i < rows; ++i) assign[m.rows[i]] = rep.assignments[i];
  j["assignments"] = std::move(assign);
  ojson reduced = ojson::array();
  for (Eigen::Index i = 0; i < pca.reduced.rows(); ++i) {
    ojson r = ojson::array();
    for (Eigen::Index c = 0; c < pca.reduced.cols(); ++c) r.push_back(pca.reduced(i, c));
    reduced.push_back(std::move(r));
  }
  j["reduced"] = std::move(reduced);
  j["sse"] = rep.sse;
  j["silhouette"] = rep.silhouette ? json(*rep.silhouette) : json(nullptr);
  j["gap"] = number_or_string(*rep.gap);
  j["degenerate"] = rep.degenerate;

  ojson curve = ojson::array();
  for (std::size_t k = 2; k <= std::min(s.curve_max_k, rows); ++k) {
    KMeansOptions ko = opts;
    ko.k = k;
    ClusterReport r = kmeans(pca.reduced, ko);
    ojson row;
    row["k"] = k;
    row["sse"] = r.sse;
    try {
      row["silhouette"] = silhouette(pca.reduced, r.assignments);
    } catch (const Error& e) {
      if (e.code() != Errc::SingleCluster) throw;
      row["silhouette"] = nullptr;
    }
    row["gap"] = number_or_string(gap_statistic(pca.reduced, ko, s.b_refs));
    curve.push_back(std::move(row));
  }
  j["k_curve"] = std::move(curve);
  return j.dump(2) + "\n";
}

std::string SnapshotSet::html(const SnapshotEntry& e) const { return io::read_file(dir / e.path); }

SnapshotSet load_snapshots(const fs::path& index_path) {
  return SnapshotSet{index_path.parent_path(), read_snapshot_index(index_path)};
}

std::vector<SiteUrl> extract_site_links(const SnapshotSet& snapshots, const PublicSuffixList& psl) {
  std::vector<SiteUrl> links;
  for (const auto& e : snapshots.entries) {
    if (e.path.empty()) continue;
    PageUrl base = normalize(e.url, nullptr, psl);
    if (!base.is_homepage()) continue;
    LinkPartition part = extract_links(snapshots.html(e), base, psl);
    for (auto& u : part.internal) links.push_back({std::move(u), base.domain});
  }
  return links;
}

LabeledMatrix build_content_matrix(const SnapshotSet& snapshots, const std::vector<BestSubpages>& best,
                                   const StopwordSet& stopwords, std::size_t min_df, const PublicSuffixList& psl,
                                   const StageLog& log) {
  std::map<std::string, std::string> topic_of_url;
  for (const auto& b : best) {
    for (const auto& [topic, u] : b.selections) topic_of_url[u.normalized] = topic;
  }
  std::map<std::string, std::string> texts;
  for (const auto& e : snapshots.entries) {
    if (e.path.empty()) continue;
    PageUrl u = normalize(e.url, nullptr, psl);
    std::string topic;
    if (u.is_homepage()) {
      topic = std::string(kHomepageTopic);
    } else if (auto it = topic_of_url.find(u.normalized); it != topic_of_url.end()) {
      topic = it->second;
    } else {
      continue;
    }
    std::string text = extract_text(snapshots.html(e));
    LanguageVerdict lang = detect_english(text);
    if (lang.confident && !lang.english) {
      if (log) log("content: skipping non-English page " + u.normalized);
      continue;
    }
    std::string& doc = texts[topic];
    if (!doc.empty()) doc += ' ';
    doc += text;
  }
  std::vector<TopicDocument> docs;
  for (auto& [topic, text] : texts) docs.push_back({topic, std::move(text)});
  return tfidf(docs, stopwords, min_df);
}

RunResult run_pipeline(const PipelineConfig& config, const StageLog& log) {
  RunResult result;
  auto note = [&](const std::string& msg) {
    if (log) log(msg);
  };
  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    if (!result.ok) {
      result.skipped.push_back(name);
      return;
    }
    note("stage " + name);
    try {
      body();
    } catch (const std::exception& e) {
      result.ok = false;
      result.failed_stage = name;
      result.message = e.what();
      note("stage " + name + " failed: " + e.what());
    }
  };
  const fs::path out = config.out_dir;
  auto emit = [&](const std::string& name, const std::string& file, const std::string& contents) {
    result.artifacts.push_back(write_artifact(out, name, file, contents));
  };

  PublicSuffixList custom_psl;
  const PublicSuffixList* psl = &PublicSuffixList::builtin();
  std::optional<TopicalDictionary> dict;
  EmbeddingModel model;
  StopwordSet stop = default_stopwords();
  DisconnectList disconnect;
  std::vector<SnapshotEntry> index;
  std::vector<FetchResult> live_pages;
  std::vector<SiteUrl> links, filtered;
  Thresholds thresholds = kDefaultThresholds;
  std::optional<TopicClassifier> classifier;
  std::vector<TopicAssignment> assignments;
  std::vector<BestSubpages> best;
  std::optional<LabeledMatrix> tracking_matrix, content_matrix;

  stage("load", [&] {
    if (!config.public_suffix.empty()) {
      custom_psl = PublicSuffixList::load(config.public_suffix.string());
      psl = &custom_psl;
    }
    dict = TopicalDictionary::parse(io::read_file(config.dictionary));
    model = EmbeddingModel::parse(io::read_file(config.embeddings));
    if (!config.stopwords.empty()) stop = parse_stopwords(io::read_file(config.stopwords));
    if (!config.disconnect.empty()) disconnect = DisconnectList::parse_tsv(io::read_file(config.disconnect));
  });

  FetchOptions fetch_opts;
  fetch_opts.parallelism = config.parallel;
  fetch_opts.timeout_seconds = config.timeout;
  fetch_opts.retries = config.retries;

  stage("fetch", [&] {
    if (config.live) {
      std::vector<PageUrl> urls;
      for (auto& row : parse_url_list(io::read_file(config.homepages), *psl)) urls.push_back(row.url);
      live_pages = fetch_all(urls, fetch_opts);
      write_snapshots(live_pages, config.snapshot_dir);
    }
    index = read_snapshot_index(config.snapshot_dir / "index.jsonl");
  });

  SnapshotSet snapshots;

  stage("extract", [&] {
    snapshots = SnapshotSet{config.snapshot_dir, index};
    links = extract_site_links(snapshots, *psl);
    emit("links", "links.jsonl", to_jsonl(links));
  });

  stage("filter", [&] {
    if (!config.train_urls.empty()) {
      std::vector<PageUrl> train;
      for (auto& row : parse_url_list(io::read_file(config.train_urls), *psl)) train.push_back(std::move(row.url));
      ThresholdFit fit = fit_thresholds(train, {}, config.fallback_defaults);
      thresholds = fit.thresholds;
      for (const auto& f : fit.fallbacks) note("threshold " + f + " fell back to its default");
    }
    if (config.max_url_length) thresholds.max_url_length = *config.max_url_length;
    if (config.max_subpath_length) thresholds.max_subpath_length = *config.max_subpath_length;
    if (config.max_hyphens) thresholds.max_hyphens = *config.max_hyphens;
    if (config.cosine_cutoff) thresholds.cosine_cutoff = *config.cosine_cutoff;
    for (const auto& row : links) {
      if (!row.url.is_homepage() && passes(row.url, thresholds)) filtered.push_back(row);
    }
    if (config.fit_cosine && !config.cosine_cutoff) {
      TopicClassifier probe(*dict, model, stop, thresholds.cosine_cutoff);
      std::vector<double> scores;
      for (const auto& row : filtered) scores.push_back(probe.max_score(row.url));
      thresholds.cosine_cutoff = fit_cosine_cutoff(scores, BucketSizes{}.cosine, config.fallback_defaults);
    }
    emit("thresholds", "thresholds.json", thresholds_to_json(thresholds));
    emit("filtered", "filtered.jsonl", to_jsonl(filtered));
  });

  stage("classify", [&] {
    classifier.emplace(*dict, model, stop, thresholds.cosine_cutoff);
    for (const auto& row : filtered) assignments.push_back(classifier->classify(row.url, row.site));
    emit("assignments", "assignments.jsonl", assignments_to_jsonl(assignments));
  });

  stage("best-subpages", [&] {
    best = best_subpages(assignments, *classifier);
    emit("best", "best.jsonl", best_subpages_to_jsonl(best));
    if (config.live) {
      std::vector<PageUrl> urls;
      for (const auto& b : best) {
        for (const auto& [topic, u] : b.selections) urls.push_back(u);
      }
      auto pages = fetch_all(urls, fetch_opts);
      pages.insert(pages.begin(), live_pages.begin(), live_pages.end());
      write_snapshots(pages, config.snapshot_dir);
      index = read_snapshot_index(config.snapshot_dir / "index.jsonl");
    }
  });

  if (config.crawl_logs.empty()) {
    if (result.ok) result.skipped.push_back("track");
  } else {
    stage("track", [&] {
      std::set<std::string> topics;
      for (const auto& t : dict->topics()) topics.insert(t.name);
      auto records = ingest_logs(io::read_file(config.crawl_logs), topics, *psl);
      TrackingReportOptions opts;
      opts.top_sites.insert(config.top_sites.begin(), config.top_sites.end());
      opts.top_k = config.top_k;
      emit("tracking-report", "tracking-report.json", tracking_report_json(records, disconnect, opts, *psl));
      tracking_matrix = build_tracking_matrix(records, {}, *psl);
    });
  }

  stage("content", [&] {
    snapshots = SnapshotSet{config.snapshot_dir, index};
    content_matrix = build_content_matrix(snapshots, best, stop, config.min_df, *psl, log);
    emit("content-matrix", "content-matrix.json", matrix_to_json(*content_matrix, "terms", false));
  });

  ClusterSettings cs;
  cs.pca_n = config.pca_n;
  cs.kmeans.k = config.k;
  cs.kmeans.seed = config.seed;
  cs.kmeans.restarts = config.restarts;
  cs.b_refs = config.b_refs;

  if (tracking_matrix) {
    stage("cluster-tracking", [&] { emit("clusters-tracking", "clusters-tracking.json", cluster_json(*tracking_matrix, cs)); });
  } else if (result.ok) {
    result.skipped.push_back("cluster-tracking");
  }
  stage("cluster-content", [&] { emit("clusters-content", "clusters-content.json", cluster_json(*content_matrix, cs)); });

  io::write_file(out / "manifest.json", manifest_json(result.artifacts));
  return result;
}

namespace {

struct Bundle {
  fs::path dir;
  std::map<std::string, std::string> paths;
  std::optional<std::string> read(const std::string& name) const {
    auto it = paths.find(name);
    if (it == paths.end() || !fs::exists(dir / it->second)) return std::nullopt;
    return io::read_file(dir / it->second);
  }
};

std::string num(double v) { return io::format_double(v); }

std::string json_num(const json& v) {
  if (v.is_number()) return num(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return "NA";
}

void cluster_csvs(const std::string& text, const std::string& stem, const fs::path& out_dir, PlotResult& res) {
  json j = json::parse(text);
  std::string scatter = "label,cluster";
  std::size_t dims = j["reduced"].empty() ? 0 : j["reduced"][0].size();
  for (std::size_t d = 0; d < dims; ++d) scatter += ",pc" + std::to_string(d + 1);
  scatter += "\n";
  const auto& rows = j["rows"];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string label = rows[i].get<std::string>();
    scatter += io::csv_escape(label) + "," + std::to_string(j["assignments"][label].get<int>());
    for (const auto& v : j["reduced"][i]) scatter += "," + num(v.get<double>());
    scatter += "\n";
  }
  std::string curve = "k,sse,silhouette,gap\n";
  for (const auto& r : j["k_curve"]) {
    curve += std::to_string(r["k"].get<std::size_t>()) + "," + json_num(r["sse"]) + "," + json_num(r["silhouette"]) +
             "," + json_num(r["gap"]) + "\n";
  }
  io::write_file(out_dir / (stem + "_scatter.csv"), scatter);
  io::write_file(out_dir / (stem + "_curve.csv"), curve);
  res.written.push_back(stem + "_scatter.csv");
  res.written.push_back(stem + "_curve.csv");
}

}  // namespace

PlotResult emit_plot_data(const fs::path& bundle_dir, const fs::path& out_dir) {
  Bundle b{bundle_dir, {}};
  for (const auto& e : parse_manifest(io::read_file(bundle_dir / "manifest.json"))) b.paths[e.name] = e.path;
  PlotResult res;
  auto write = [&](const std::string& file, const std::string& contents) {
    io::write_file(out_dir / file, contents);
    res.written.push_back(file);
  };
  auto missing = [&](const std::string& artifact, const std::string& what) {
    res.missing.push_back("MissingStage: " + artifact + " absent, " + what + " not emitted");
  };

  if (auto text = b.read("links")) {
    std::vector<double> len, sub, hyph;
    for (const auto& row : parse_url_list(*text)) {
      if (row.url.is_homepage()) continue;
      UrlMetrics m = url_metrics(row.url);
      len.push_back(static_cast<double>(m.url_length));
      sub.push_back(static_cast<double>(m.max_subpath_length));
      hyph.push_back(static_cast<double>(m.max_hyphens));
    }
    if (len.empty()) {
      res.missing.push_back("links.jsonl holds no subpage URLs, histograms not emitted");
    } else {
      BucketSizes bs;
      write("hist_url_length.csv", build_histogram(len, bs.url_length).to_csv());
      write("hist_subpath_length.csv", build_histogram(sub, bs.subpath_length).to_csv());
      write("hist_hyphens.csv", build_histogram(hyph, bs.hyphens).to_csv());
    }
  } else {
    missing("links", "parameter histograms");
  }

  if (auto text = b.read("best")) {
    auto rows = parse_best_subpages(*text);
    std::set<std::string> sites;
    std::map<std::string, std::size_t> per_topic;
    for (const auto& r : rows) {
      sites.insert(r.site);
      for (const auto& [topic, u] : r.selections) ++per_topic[topic];
    }
    std::string csv = "topic,sites,percent\n";
    for (const auto& [topic, n] : per_topic) {
      csv += io::csv_escape(topic) + "," + std::to_string(n) + "," +
             num(100.0 * static_cast<double>(n) / static_cast<double>(sites.size())) + "\n";
    }
    write("topic_coverage.csv", csv);
  } else {
    missing("best", "topic coverage");
  }

  if (auto text = b.read("tracking-report")) {
    json j = json::parse(*text);
    std::string dist = "topic,cookies\n";
    for (const auto& [topic, values] : j["cookie_counts"].items()) {
      for (const auto& v : values) dist += io::csv_escape(topic) + "," + num(v.get<double>()) + "\n";
    }
    write("cookie_distribution.csv", dist);

    std::string cats = "scope,topic,category,count\n";
    for (const char* scope : {"all", "top_sites"}) {
      for (const auto& [topic, row] : j["category_breakdown"][scope].items()) {
        for (const auto& [cat, n] : row.items()) {
          cats += std::string(scope) + "," + io::csv_escape(topic) + "," + io::csv_escape(cat) + "," +
                  std::to_string(n.get<std::size_t>()) + "\n";
        }
      }
    }
    write("categories.csv", cats);

    std::string diff = "topic,category,percent_diff\n";
    for (const auto& [topic, row] : j["percent_diff"].items()) {
      for (const auto& [cat, v] : row.items()) {
        diff += io::csv_escape(topic) + "," + io::csv_escape(cat) + "," + json_num(v) + "\n";
      }
    }
    write("percent_diff.csv", diff);

    std::string heat = "tp,topic,percent\n";
    for (const auto& cov : j["top_tp_coverage"]) {
      for (const auto& [topic, p] : cov["percent_by_topic"].items()) {
        heat += io::csv_escape(cov["tp"].get<std::string>()) + "," + io::csv_escape(topic) + "," + json_num(p) + "\n";
      }
    }
    write("heatmap.csv", heat);
  } else {
    missing("tracking-report", "cookie distribution, categories, percent diff and heatmap");
  }

  for (const char* name : {"clusters-tracking", "clusters-content"}) {
    std::string stem = name == std::string("clusters-tracking") ? "cluster_tracking" : "cluster_content";
    if (auto text = b.read(name)) {
      cluster_csvs(*text, stem, out_dir, res);
    } else {
      missing(name, stem + " scatter and curve");
    }
  }
  return res;
}

}  // namespace dibets
