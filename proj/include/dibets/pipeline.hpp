#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dibets/classifier.hpp"
#include "dibets/clustering.hpp"
#include "dibets/fetcher.hpp"
#include "dibets/labeled_matrix.hpp"
#include "dibets/stopwords.hpp"

namespace dibets {

namespace fs = std::filesystem;

struct PipelineConfig {
  fs::path dictionary;
  fs::path embeddings;
  fs::path stopwords;      // empty: built-in English list
  fs::path disconnect;     // TSV domain<TAB>category; empty: every TP is Unknown
  fs::path snapshot_dir;   // holds index.jsonl
  fs::path crawl_logs;     // empty: tracking and clustering of tracking skipped
  fs::path public_suffix;  // empty: built-in snapshot
  fs::path train_urls;     // empty: thresholds are defaults plus overrides
  fs::path homepages;      // URL list used only with live = true
  fs::path out_dir = "out";

  std::optional<std::size_t> max_url_length;
  std::optional<std::size_t> max_subpath_length;
  std::optional<std::size_t> max_hyphens;
  std::optional<double> cosine_cutoff;
  bool fallback_defaults = false;
  bool fit_cosine = false;

  std::vector<std::string> top_sites;
  std::uint64_t seed = 42;
  unsigned parallel = 4;
  bool live = false;
  double timeout = 30.0;
  unsigned retries = 2;

  std::size_t pca_n = 2;
  std::size_t k = 3;
  std::size_t restarts = 10;
  std::size_t b_refs = 10;
  std::size_t min_df = 1;
  std::size_t top_k = 10;
};

// Precedence: config file < DIBETS_<KEY> environment variable < explicit
// overrides (command-line flags). The environment name is the upper-cased key.
const std::vector<std::string>& config_keys();
std::string env_name(const std::string& key);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

// Parses `key = value` lines (# comments, optional double quotes).
std::map<std::string, std::string> parse_config_text(std::string_view text);

// Relative paths from the file resolve against the file's directory.
PipelineConfig load_config(const std::optional<fs::path>& file, const std::map<std::string, std::string>& overrides,
                           const EnvLookup& env = process_env);

// Throws ConfigInvalid naming the first missing or non-existent path.
void validate_config(const PipelineConfig& config);

struct ManifestEntry {
  std::string name;
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

std::string manifest_json(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(std::string_view text);
// Writes the artifact and returns its manifest entry.
ManifestEntry write_artifact(const fs::path& out_dir, const std::string& name, const std::string& relative,
                             const std::string& contents);

struct RunResult {
  bool ok = true;
  std::string failed_stage;
  std::string message;
  std::vector<std::string> skipped;  // stages not run after a failure or for lack of input
  std::vector<ManifestEntry> artifacts;
};

using StageLog = std::function<void(const std::string&)>;

struct SnapshotSet {
  fs::path dir;
  std::vector<SnapshotEntry> entries;
  std::string html(const SnapshotEntry& e) const;
};

SnapshotSet load_snapshots(const fs::path& index_path);

// Internal links of every snapshotted homepage, tagged with the homepage's
// registrable domain as site.
std::vector<SiteUrl> extract_site_links(const SnapshotSet& snapshots,
                                        const PublicSuffixList& psl = PublicSuffixList::builtin());

// One document per topic from the selected subpages, plus a "homepage"
// document from the homepages. Confidently non-English pages are dropped.
LabeledMatrix build_content_matrix(const SnapshotSet& snapshots, const std::vector<BestSubpages>& best,
                                   const StopwordSet& stopwords, std::size_t min_df,
                                   const PublicSuffixList& psl = PublicSuffixList::builtin(),
                                   const StageLog& log = {});

// fetch or snapshot read -> extract -> fit/filter -> classify -> best subpages
// -> tracking -> content -> clustering. Writes out_dir/manifest.json.
RunResult run_pipeline(const PipelineConfig& config, const StageLog& log = {});

struct ClusterSettings {
  std::size_t pca_n = 2;
  KMeansOptions kmeans;
  std::size_t b_refs = 10;
  std::size_t curve_max_k = 15;
};

// PCA plus k-means on a labeled matrix; pca_n is clamped to what the matrix
// supports. Includes reduced coordinates and a k curve (sse, silhouette, gap).
std::string cluster_json(const LabeledMatrix& m, const ClusterSettings& settings);

struct PlotResult {
  std::vector<std::string> written;  // relative CSV paths
  std::vector<std::string> missing;  // MissingStage notes
};

// Reads the manifest in bundle_dir and writes plot-ready CSVs into out_dir.
PlotResult emit_plot_data(const fs::path& bundle_dir, const fs::path& out_dir);

}  // namespace dibets
