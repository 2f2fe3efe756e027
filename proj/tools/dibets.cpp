#include <cstdio>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "dibets/classifier.hpp"
#include "dibets/clustering.hpp"
#include "dibets/content.hpp"
#include "dibets/dictionary.hpp"
#include "dibets/embeddings.hpp"
#include "dibets/error.hpp"
#include "dibets/fetcher.hpp"
#include "dibets/io.hpp"
#include "dibets/pipeline.hpp"
#include "dibets/thresholding.hpp"
#include "dibets/tracking.hpp"
#include "dibets/url.hpp"

using namespace dibets;

namespace {

std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      auto v = std::stoul(s);
      return {v, v};
    }
    return {std::stoul(s.substr(0, dots)), std::stoul(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw Error(Errc::InvalidArgument, "range '" + s + "' is not N or A..B");
  }
}

fs::path pick(const std::string& flag, const fs::path& fallback, const char* what) {
  if (!flag.empty()) return flag;
  if (!fallback.empty()) return fallback;
  throw Error(Errc::ConfigInvalid, std::string(what) + " not given on the command line or in the config");
}

StopwordSet load_stopwords(const std::string& flag, const PipelineConfig& cfg) {
  fs::path p = flag.empty() ? cfg.stopwords : fs::path(flag);
  return p.empty() ? default_stopwords() : parse_stopwords(io::read_file(p));
}

std::vector<SiteUrl> read_urls(const fs::path& p) { return parse_url_list(io::read_file(p)); }

void say(const std::string& msg) { std::cerr << msg << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dibets: topical subpage discovery and tracking analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> parallel;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "RNG seed (default 42)");
  app.add_option("--parallel", parallel, "concurrent fetches");
  app.add_option("--out-dir", out_dir, "output directory for run and report");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "fetch pages into a snapshot directory");
  std::string f_urls, f_out;
  double f_timeout = 30;
  unsigned f_retries = 2;
  bool f_live = false, f_robots = false;
  std::string f_agent = kDefaultUserAgent;
  fetch->add_option("--urls", f_urls, "URL list (JSONL or one per line)")->required();
  fetch->add_option("--out", f_out, "snapshot directory")->required();
  fetch->add_option("--timeout", f_timeout, "seconds per request");
  fetch->add_option("--retries", f_retries, "retries after a 5xx or transport failure");
  fetch->add_option("--user-agent", f_agent);
  fetch->add_flag("--live", f_live, "touch the network; otherwise only check the existing index");
  fetch->add_flag("--respect-robots", f_robots);

  auto* extract = app.add_subcommand("extract", "internal links of snapshotted homepages");
  std::string x_pages, x_out;
  extract->add_option("--pages", x_pages, "snapshot index.jsonl")->required();
  extract->add_option("--out", x_out, "links.jsonl")->required();

  auto* fit = app.add_subcommand("fit-thresholds", "fit URL thresholds on training URLs");
  std::string t_urls, t_out, t_hist;
  bool t_fallback = false;
  fit->add_option("--urls", t_urls)->required();
  fit->add_option("--out", t_out)->required();
  fit->add_option("--hist-dir", t_hist, "write bucket,count CSVs here");
  fit->add_flag("--fallback-defaults", t_fallback);

  auto* filter = app.add_subcommand("filter", "keep URLs under the thresholds");
  std::string l_urls, l_thr, l_out;
  filter->add_option("--urls", l_urls)->required();
  filter->add_option("--thresholds", l_thr);
  filter->add_option("--out", l_out)->required();

  auto* classify = app.add_subcommand("classify", "assign a topic to every URL");
  std::string c_urls, c_dict, c_emb, c_thr, c_stop, c_out;
  classify->add_option("--urls", c_urls)->required();
  classify->add_option("--dict", c_dict);
  classify->add_option("--embeddings", c_emb);
  classify->add_option("--thresholds", c_thr);
  classify->add_option("--stopwords", c_stop);
  classify->add_option("--out", c_out)->required();

  auto* best = app.add_subcommand("best-subpages", "pick one URL per (site, topic)");
  std::string b_assign, b_dict, b_emb, b_stop, b_out;
  best->add_option("--assignments", b_assign)->required();
  best->add_option("--dict", b_dict);
  best->add_option("--embeddings", b_emb);
  best->add_option("--stopwords", b_stop);
  best->add_option("--out", b_out)->required();

  auto* track = app.add_subcommand("track", "tracking report from crawl logs");
  std::string k_logs, k_dl, k_topics, k_out;
  std::vector<std::string> k_top_sites;
  std::size_t k_top_k = 10;
  track->add_option("--logs", k_logs)->required();
  track->add_option("--disconnect", k_dl);
  track->add_option("--topics", k_topics, "best.jsonl defining the topic universe");
  track->add_option("--top-sites", k_top_sites)->delimiter(',');
  track->add_option("--top-k", k_top_k);
  track->add_option("--out", k_out)->required();

  auto* content = app.add_subcommand("content", "per-topic tf-idf matrix");
  std::string n_pages, n_topics, n_stop, n_out;
  std::size_t n_min_df = 1;
  content->add_option("--pages", n_pages, "snapshot index.jsonl")->required();
  content->add_option("--topics", n_topics, "best.jsonl")->required();
  content->add_option("--stopwords", n_stop);
  content->add_option("--min-df", n_min_df);
  content->add_option("--out", n_out)->required();

  auto* cluster = app.add_subcommand("cluster", "PCA + k-means on a matrix");
  std::string u_matrix, u_out;
  std::size_t u_n = 2, u_k = 4, u_restarts = 10, u_brefs = 10;
  cluster->add_option("--matrix", u_matrix)->required();
  cluster->add_option("--pca-n", u_n);
  cluster->add_option("--k", u_k);
  cluster->add_option("--restarts", u_restarts);
  cluster->add_option("--b-refs", u_brefs);
  cluster->add_option("--out", u_out)->required();

  auto* sweep = app.add_subcommand("cluster-sweep", "metrics over (n, k) ranges");
  std::string w_matrix, w_out, w_n = "2..15", w_k = "2..15";
  std::size_t w_restarts = 10, w_brefs = 10;
  sweep->add_option("--matrix", w_matrix)->required();
  sweep->add_option("--n", w_n);
  sweep->add_option("--k", w_k);
  sweep->add_option("--restarts", w_restarts);
  sweep->add_option("--b-refs", w_brefs);
  sweep->add_option("--out", w_out)->required();

  auto* report = app.add_subcommand("report", "plot-ready CSVs from a run directory");
  std::string r_bundle, r_out;
  report->add_option("--bundle", r_bundle, "directory holding manifest.json");
  report->add_option("--out", r_out, "defaults to <bundle>/plots");

  auto* assist = app.add_subcommand("assist-dictionary", "frequent subpaths of unclassified URLs");
  std::string a_assign, a_dict, a_out;
  assist->add_option("--assignments", a_assign)->required();
  assist->add_option("--dict", a_dict);
  assist->add_option("--out", a_out, "CSV; stdout when omitted");

  auto* run = app.add_subcommand("run", "full pipeline from the config");

  auto* convert = app.add_subcommand("convert-disconnect", "services.json to domain<TAB>category TSV");
  std::string v_in, v_out;
  convert->add_option("--services", v_in)->required();
  convert->add_option("--out", v_out)->required();

  CLI11_PARSE(app, argc, argv);

  PipelineConfig cfg;
  try {
    std::map<std::string, std::string> overrides;
    if (seed) overrides["seed"] = std::to_string(*seed);
    if (parallel) overrides["parallel"] = std::to_string(*parallel);
    if (!out_dir.empty()) overrides["out_dir"] = out_dir;
    std::optional<fs::path> file;
    if (!config_path.empty()) file = fs::path(config_path);
    cfg = load_config(file, overrides);
  } catch (const Error& e) {
    say(std::string("config: ") + e.what());
    return 2;
  }

  try {
    if (*fetch) {
      auto rows = read_urls(f_urls);
      if (!f_live) {
        fs::path index = fs::path(f_out) / "index.jsonl";
        std::set<std::string> have;
        if (fs::exists(index)) {
          for (const auto& e : read_snapshot_index(index)) have.insert(e.url);
        }
        std::size_t missing = 0;
        for (const auto& r : rows) {
          if (!have.count(r.url.normalized)) {
            say("not in snapshot: " + r.url.normalized);
            ++missing;
          }
        }
        say(std::to_string(rows.size() - missing) + "/" + std::to_string(rows.size()) +
            " URLs already snapshotted; pass --live to fetch");
        return missing == 0 ? 0 : 1;
      }
      FetchOptions opts;
      opts.parallelism = cfg.parallel;
      opts.timeout_seconds = f_timeout;
      opts.retries = f_retries;
      opts.user_agent = f_agent;
      opts.respect_robots = f_robots;
      std::vector<PageUrl> urls;
      for (auto& r : rows) urls.push_back(r.url);
      auto results = fetch_all(urls, opts);
      std::size_t failed = 0;
      for (const auto& r : results) {
        if (!r.ok()) {
          ++failed;
          say(r.url.normalized + ": " + r.error.value_or("no status"));
        }
      }
      write_snapshots(results, f_out);
      say(std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " fetched");
    } else if (*extract) {
      io::write_file(x_out, to_jsonl(extract_site_links(load_snapshots(x_pages))));
    } else if (*fit) {
      std::vector<PageUrl> urls;
      for (auto& r : read_urls(t_urls)) urls.push_back(std::move(r.url));
      ThresholdFit tf = fit_thresholds(urls, {}, t_fallback || cfg.fallback_defaults);
      for (const auto& f : tf.fallbacks) say(f + " fell back to its default");
      io::write_file(t_out, thresholds_to_json(tf.thresholds));
      if (!t_hist.empty()) {
        io::write_file(fs::path(t_hist) / "hist_url_length.csv", tf.url_length.to_csv());
        io::write_file(fs::path(t_hist) / "hist_subpath_length.csv", tf.subpath_length.to_csv());
        io::write_file(fs::path(t_hist) / "hist_hyphens.csv", tf.hyphens.to_csv());
      }
    } else if (*filter) {
      Thresholds t = l_thr.empty() ? kDefaultThresholds : thresholds_from_json(io::read_file(l_thr));
      std::vector<SiteUrl> kept;
      for (auto& r : read_urls(l_urls)) {
        if (!r.url.is_homepage() && passes(r.url, t)) kept.push_back(std::move(r));
      }
      io::write_file(l_out, to_jsonl(kept));
    } else if (*classify) {
      auto dict = TopicalDictionary::parse(io::read_file(pick(c_dict, cfg.dictionary, "--dict")));
      auto model = EmbeddingModel::parse(io::read_file(pick(c_emb, cfg.embeddings, "--embeddings")));
      StopwordSet stop = load_stopwords(c_stop, cfg);
      Thresholds t = c_thr.empty() ? kDefaultThresholds : thresholds_from_json(io::read_file(c_thr));
      if (cfg.cosine_cutoff) t.cosine_cutoff = *cfg.cosine_cutoff;
      TopicClassifier clf(dict, model, stop, t.cosine_cutoff);
      std::vector<TopicAssignment> out;
      for (const auto& r : read_urls(c_urls)) {
        if (r.url.is_homepage()) continue;
        out.push_back(clf.classify(r.url, r.site));
      }
      io::write_file(c_out, assignments_to_jsonl(out));
    } else if (*best) {
      auto dict = TopicalDictionary::parse(io::read_file(pick(b_dict, cfg.dictionary, "--dict")));
      auto model = EmbeddingModel::parse(io::read_file(pick(b_emb, cfg.embeddings, "--embeddings")));
      StopwordSet stop = load_stopwords(b_stop, cfg);
      TopicClassifier clf(dict, model, stop, kDefaultThresholds.cosine_cutoff);
      auto rows = parse_assignments(io::read_file(b_assign), &dict);
      io::write_file(b_out, best_subpages_to_jsonl(best_subpages(rows, clf)));
    } else if (*track) {
      std::set<std::string> topics;
      if (!k_topics.empty()) {
        for (const auto& b : parse_best_subpages(io::read_file(k_topics))) {
          for (const auto& [topic, u] : b.selections) topics.insert(topic);
        }
      }
      auto records = ingest_logs(io::read_file(k_logs), topics);
      DisconnectList dl;
      fs::path dl_path = k_dl.empty() ? cfg.disconnect : fs::path(k_dl);
      if (!dl_path.empty()) dl = DisconnectList::parse_tsv(io::read_file(dl_path));
      TrackingReportOptions opts;
      opts.top_sites.insert(k_top_sites.begin(), k_top_sites.end());
      if (opts.top_sites.empty()) opts.top_sites.insert(cfg.top_sites.begin(), cfg.top_sites.end());
      opts.top_k = k_top_k;
      io::write_file(k_out, tracking_report_json(records, dl, opts));
    } else if (*content) {
      auto best_rows = parse_best_subpages(io::read_file(n_topics));
      LabeledMatrix m = build_content_matrix(load_snapshots(n_pages), best_rows, load_stopwords(n_stop, cfg), n_min_df,
                                             PublicSuffixList::builtin(), say);
      io::write_file(n_out, matrix_to_json(m, "terms", false));
    } else if (*cluster) {
      ClusterSettings s;
      s.pca_n = u_n;
      s.kmeans.k = u_k;
      s.kmeans.seed = cfg.seed;
      s.kmeans.restarts = u_restarts;
      s.b_refs = u_brefs;
      io::write_file(u_out, cluster_json(matrix_from_json(io::read_file(u_matrix)), s));
    } else if (*sweep) {
      LabeledMatrix m = matrix_from_json(io::read_file(w_matrix));
      KMeansOptions base;
      base.seed = cfg.seed;
      base.restarts = w_restarts;
      SweepResult res = model_select(m.cells, parse_range(w_n), parse_range(w_k), base, w_brefs);
      for (const auto& r : res.rows) {
        if (!r.error.empty()) say("n=" + std::to_string(r.n) + " k=" + std::to_string(r.k) + ": " + r.error);
      }
      if (res.best_silhouette) {
        const auto& b = res.rows[*res.best_silhouette];
        say("best silhouette at n=" + std::to_string(b.n) + " k=" + std::to_string(b.k));
      }
      io::write_file(w_out, sweep_to_csv(res));
    } else if (*report) {
      fs::path bundle = r_bundle.empty() ? cfg.out_dir : fs::path(r_bundle);
      fs::path out = r_out.empty() ? bundle / "plots" : fs::path(r_out);
      PlotResult res = emit_plot_data(bundle, out);
      for (const auto& m : res.missing) say(m);
      say(std::to_string(res.written.size()) + " CSV files written to " + out.string());
    } else if (*assist) {
      std::optional<TopicalDictionary> dict;
      fs::path dp = a_dict.empty() ? cfg.dictionary : fs::path(a_dict);
      if (!dp.empty()) dict = TopicalDictionary::parse(io::read_file(dp));
      auto rows = parse_assignments(io::read_file(a_assign), dict ? &*dict : nullptr);
      std::string csv = "subpath,count\n";
      for (const auto& [sub, n] : dictionary_assist(rows, dict ? &*dict : nullptr)) {
        csv += io::csv_escape(sub) + "," + std::to_string(n) + "\n";
      }
      if (a_out.empty()) std::cout << csv;
      else io::write_file(a_out, csv);
    } else if (*run) {
      try {
        validate_config(cfg);
      } catch (const Error& e) {
        say(std::string("config: ") + e.what());
        return 2;
      }
      RunResult res = run_pipeline(cfg, say);
      for (const auto& s : res.skipped) say("skipped " + s);
      if (!res.ok) {
        say("stage " + res.failed_stage + " failed: " + res.message);
        return 1;
      }
      say(std::to_string(res.artifacts.size()) + " artifacts, manifest at " + (cfg.out_dir / "manifest.json").string());
    } else if (*convert) {
      io::write_file(v_out, DisconnectList::tsv_from_services_json(io::read_file(v_in)));
    }
  } catch (const Error& e) {
    say(e.what());
    return e.code() == Errc::ConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    say(std::string("error: ") + e.what());
    return 1;
  }
  return 0;
}
