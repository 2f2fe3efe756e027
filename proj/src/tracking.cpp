#include "dibets/tracking.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "dibets/error.hpp"
#include "dibets/io.hpp"

namespace dibets {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string clean_host(std::string_view host) {
  std::string h(host);
  std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  while (!h.empty() && h.front() == '.') h.erase(h.begin());
  while (!h.empty() && h.back() == '.') h.pop_back();
  return h;
}

std::string tp_key(std::string_view host, const PublicSuffixList& psl) {
  return psl.registrable_domain(clean_host(host));
}

}  // namespace

std::set<std::string> CrawlRecord::third_parties(const PublicSuffixList& psl) const {
  std::set<std::string> out;
  for (const auto& c : cookies) {
    if (c.is_third_party) out.insert(tp_key(c.cookie_domain, psl));
  }
  for (const auto& r : requests) {
    if (r.is_third_party) out.insert(tp_key(r.request_domain, psl));
  }
  return out;
}

std::size_t CrawlRecord::third_party_cookie_count() const {
  return static_cast<std::size_t>(
      std::count_if(cookies.begin(), cookies.end(), [](const Cookie& c) { return c.is_third_party; }));
}

std::vector<CrawlRecord> ingest_logs(std::string_view jsonl, const std::set<std::string>& topics,
                                     const PublicSuffixList& psl) {
  std::vector<CrawlRecord> out;
  for (auto [no, line] : io::lines(jsonl)) {
    auto fail = [no = no](const std::string& why) -> Error {
      return Error(Errc::MalformedRecord, "line " + std::to_string(no) + ": " + why);
    };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw fail("not a JSON object");
    CrawlRecord r;
    try {
      r.page_url = normalize(j.at("page_url").get<std::string>(), nullptr, psl);
      r.site = clean_host(j.at("site").get<std::string>());
      r.topic = j.at("topic").get<std::string>();
      r.crawl_id = j.value("crawl_id", std::string{});
      r.redirects = j.value("redirects", std::size_t{0});
      const std::string site_key = psl.registrable_domain(r.site);
      for (const auto& c : j.value("cookies", json::array())) {
        Cookie cookie;
        cookie.name = c.value("name", std::string{});
        cookie.cookie_domain = clean_host(c.at("cookie_domain").get<std::string>());
        if (cookie.cookie_domain.empty()) throw fail("empty cookie_domain");
        cookie.is_third_party = psl.registrable_domain(cookie.cookie_domain) != site_key;
        r.cookies.push_back(std::move(cookie));
      }
      for (const auto& q : j.value("requests", json::array())) {
        Request req;
        req.request_domain = clean_host(q.at("request_domain").get<std::string>());
        if (req.request_domain.empty()) throw fail("empty request_domain");
        req.is_third_party = psl.registrable_domain(req.request_domain) != site_key;
        r.requests.push_back(std::move(req));
      }
    } catch (const Error& e) {
      if (e.code() == Errc::MalformedRecord) throw;
      throw fail(e.what());
    } catch (const json::exception& e) {
      throw fail(e.what());
    }
    if (r.site.empty()) throw fail("empty site");
    if (!topics.empty() && r.topic != kHomepageTopic && !topics.count(r.topic)) {
      throw Error(Errc::UnknownTopic, "line " + std::to_string(no) + ": '" + r.topic + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Advertising: return "Advertising";
    case Category::ContentSocial: return "Content&Social";
    case Category::Analytics: return "Analytics";
    case Category::Fingerprinting: return "Fingerprinting";
    case Category::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::optional<Category> category_from_name(std::string_view name) {
  std::string n;
  for (char c : name) {
    if (std::isalpha(static_cast<unsigned char>(c))) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (n == "advertising") return Category::Advertising;
  if (n == "contentsocial" || n == "content" || n == "social") return Category::ContentSocial;
  if (n == "analytics") return Category::Analytics;
  if (n.starts_with("fingerprinting")) return Category::Fingerprinting;
  if (n == "unknown") return Category::Unknown;
  return std::nullopt;
}

DisconnectList DisconnectList::parse_tsv(std::string_view text) {
  DisconnectList dl;
  for (auto [no, line] : io::lines(text)) {
    if (line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(Errc::MalformedDocument, "disconnect list line " + std::to_string(no) + ": expected two columns");
    }
    std::string domain = clean_host(line.substr(0, tab));
    std::string_view cat_text = line.substr(tab + 1);
    while (!cat_text.empty() && std::isspace(static_cast<unsigned char>(cat_text.back()))) cat_text.remove_suffix(1);
    auto cat = category_from_name(cat_text);
    if (!cat || *cat == Category::Unknown || domain.empty()) {
      throw Error(Errc::MalformedDocument,
                  "disconnect list line " + std::to_string(no) + ": bad entry '" + std::string(line) + "'");
    }
    dl.add(std::move(domain), *cat);
  }
  return dl;
}

std::string DisconnectList::tsv_from_services_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.contains("categories") || !j["categories"].is_object()) {
    throw Error(Errc::MalformedDocument, "services JSON needs a \"categories\" object");
  }
  std::map<std::string, Category> entries;
  for (const auto& [cat_name, companies] : j["categories"].items()) {
    auto cat = category_from_name(cat_name);
    if (!cat || *cat == Category::Unknown || !companies.is_array()) continue;
    for (const auto& company : companies) {
      if (!company.is_object()) continue;
      for (const auto& [_, sites] : company.items()) {
        if (!sites.is_object()) continue;
        for (const auto& [homepage, domains] : sites.items()) {
          if (!domains.is_array()) continue;  // skips flags such as "performance": "true"
          for (const auto& d : domains) {
            if (d.is_string()) entries.emplace(clean_host(d.get<std::string>()), *cat);  // first category wins
          }
        }
      }
    }
  }
  std::string out = "# domain\tcategory\n";
  for (const auto& [domain, cat] : entries) out += domain + "\t" + std::string(category_name(cat)) + "\n";
  return out;
}

Category DisconnectList::categorize(std::string_view domain) const {
  std::string host = clean_host(domain);
  std::string_view h = host;
  while (!h.empty()) {
    auto it = entries_.find(h);
    if (it != entries_.end()) return it->second;
    auto dot = h.find('.');
    if (dot == std::string_view::npos) break;
    h.remove_prefix(dot + 1);
  }
  return Category::Unknown;
}

std::map<std::string, std::vector<double>> cookie_counts_by_topic(const std::vector<CrawlRecord>& records) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& r : records) out[r.topic].push_back(static_cast<double>(r.third_party_cookie_count()));
  return out;
}

std::map<std::string, stats::Summary> cookie_stats_by_topic(const std::vector<CrawlRecord>& records) {
  std::map<std::string, stats::Summary> out;
  for (const auto& [topic, counts] : cookie_counts_by_topic(records)) out.emplace(topic, stats::summary(counts));
  return out;
}

Breakdown category_breakdown(const std::vector<CrawlRecord>& records, const DisconnectList& dl,
                             const std::set<std::string>* sites, const PublicSuffixList& psl) {
  std::map<std::string, std::set<std::string>> tps;
  for (const auto& r : records) {
    if (sites && !sites->count(r.site)) continue;
    auto& set = tps[r.topic];
    for (const auto& tp : r.third_parties(psl)) set.insert(tp);
  }
  Breakdown out;
  for (const auto& [topic, set] : tps) {
    CategoryCounts counts;
    for (Category c : kAllCategories) counts[c] = 0;
    for (const auto& tp : set) ++counts[dl.categorize(tp)];
    out.emplace(topic, std::move(counts));
  }
  return out;
}

std::map<std::string, std::map<Category, PercentDiff>> percent_diff_vs_homepage(const Breakdown& breakdown) {
  auto home = breakdown.find(std::string(kHomepageTopic));
  if (home == breakdown.end()) throw Error(Errc::MissingStage, "breakdown has no homepage row");
  std::map<std::string, std::map<Category, PercentDiff>> out;
  for (const auto& [topic, counts] : breakdown) {
    if (topic == kHomepageTopic) continue;
    auto& row = out[topic];
    for (Category c : kAllCategories) {
      auto get = [c](const CategoryCounts& m) {
        auto it = m.find(c);
        return it == m.end() ? 0.0 : static_cast<double>(it->second);
      };
      double t = get(counts), h = get(home->second);
      if (h == 0.0) row.emplace(c, t > 0.0 ? PercentDiff(std::string("new")) : PercentDiff(0.0));
      else row.emplace(c, 100.0 * (t - h) / h);
    }
  }
  return out;
}

LabeledMatrix build_tracking_matrix(const std::vector<CrawlRecord>& records, const std::set<std::string>& topics,
                                    const PublicSuffixList& psl) {
  std::set<std::string> row_set = topics;
  std::set<std::string> col_set;
  std::map<std::string, std::set<std::string>> present;
  for (const auto& r : records) {
    row_set.insert(r.topic);
    for (const auto& tp : r.third_parties(psl)) {
      col_set.insert(tp);
      present[r.topic].insert(tp);
    }
  }
  LabeledMatrix m;
  m.rows.assign(row_set.begin(), row_set.end());
  m.columns.assign(col_set.begin(), col_set.end());
  m.cells = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows.size()), static_cast<Eigen::Index>(m.columns.size()));
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    auto it = present.find(m.rows[i]);
    if (it == present.end()) continue;
    for (std::size_t j = 0; j < m.columns.size(); ++j) {
      if (it->second.count(m.columns[j])) m.cells(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    }
  }
  return m;
}

std::vector<TpCoverage> top_tp_coverage(const std::vector<CrawlRecord>& records, std::size_t k,
                                        const PublicSuffixList& psl) {
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  std::map<std::string, std::size_t> cookies;
  std::map<std::string, std::set<std::string>> pages_by_topic;
  std::map<std::string, std::map<std::string, std::set<std::string>>> present;  // tp -> topic -> pages
  for (const auto& r : records) {
    pages_by_topic[r.topic].insert(r.page_url.normalized);
    for (const auto& c : r.cookies) {
      if (c.is_third_party) ++cookies[tp_key(c.cookie_domain, psl)];
    }
    for (const auto& tp : r.third_parties(psl)) {
      cookies.try_emplace(tp, 0);
      present[tp][r.topic].insert(r.page_url.normalized);
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(cookies.begin(), cookies.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  ranked.resize(std::min(k, ranked.size()));

  std::vector<TpCoverage> out;
  for (const auto& [tp, total] : ranked) {
    TpCoverage cov{tp, total, {}};
    for (const auto& [topic, pages] : pages_by_topic) {
      std::size_t hit = 0;
      if (auto it = present[tp].find(topic); it != present[tp].end()) hit = it->second.size();
      cov.percent_by_topic[topic] = 100.0 * static_cast<double>(hit) / static_cast<double>(pages.size());
    }
    out.push_back(std::move(cov));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> preferential_attachment(const LabeledMatrix& tracking) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t c = 0; c < tracking.columns.size(); ++c) {
    std::size_t hits = 0;
    std::string topic;
    for (std::size_t r = 0; r < tracking.rows.size(); ++r) {
      if (tracking.rows[r] == kHomepageTopic) continue;
      if (tracking.cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) != 0.0) {
        ++hits;
        topic = tracking.rows[r];
      }
    }
    if (hits == 1) out.emplace_back(tracking.columns[c], topic);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

ojson breakdown_json(const Breakdown& b) {
  ojson j = ojson::object();
  for (const auto& [topic, counts] : b) {
    ojson row = ojson::object();
    for (const auto& [cat, n] : counts) row[std::string(category_name(cat))] = n;
    j[topic] = std::move(row);
  }
  return j;
}

ojson summary_json(const stats::Summary& s) {
  ojson j;
  j["visits"] = s.count;
  j["median"] = s.median;
  j["mean"] = s.mean;
  j["min"] = s.min;
  j["max"] = s.max;
  j["q1"] = s.q1;
  j["q3"] = s.q3;
  return j;
}

}  // namespace

std::string tracking_report_json(const std::vector<CrawlRecord>& records, const DisconnectList& dl,
                                 const TrackingReportOptions& options, const PublicSuffixList& psl) {
  ojson report;
  LabeledMatrix matrix = build_tracking_matrix(records, options.topics, psl);
  report["topics"] = matrix.rows;
  report["record_count"] = records.size();
  report["third_party_count"] = matrix.columns.size();

  auto counts = cookie_counts_by_topic(records);
  ojson stats_j = ojson::object();
  auto home = counts.find(std::string(kHomepageTopic));
  for (const auto& [topic, values] : counts) {
    ojson row = summary_json(stats::summary(values));
    if (home != counts.end() && topic != kHomepageTopic) {
      auto ks = stats::ks_two_sample(values, home->second);
      row["ks_vs_homepage"] = {{"d", ks.d_statistic}, {"p", ks.p_value}};
    }
    stats_j[topic] = std::move(row);
  }
  report["cookie_stats"] = std::move(stats_j);
  ojson counts_j = ojson::object();
  for (const auto& [topic, values] : counts) counts_j[topic] = values;
  report["cookie_counts"] = std::move(counts_j);

  Breakdown all = category_breakdown(records, dl, nullptr, psl);
  report["category_breakdown"]["all"] = breakdown_json(all);
  report["category_breakdown"]["top_sites"] =
      options.top_sites.empty() ? ojson::object() : breakdown_json(category_breakdown(records, dl, &options.top_sites, psl));

  ojson diff_j = ojson::object();
  if (all.count(std::string(kHomepageTopic))) {
    for (const auto& [topic, row] : percent_diff_vs_homepage(all)) {
      ojson r = ojson::object();
      for (const auto& [cat, v] : row) {
        std::string key(category_name(cat));
        if (std::holds_alternative<double>(v)) r[key] = std::get<double>(v);
        else r[key] = std::get<std::string>(v);
      }
      diff_j[topic] = std::move(r);
    }
  }
  report["percent_diff"] = std::move(diff_j);

  ojson cov_j = ojson::array();
  for (const auto& cov : top_tp_coverage(records, options.top_k, psl)) {
    ojson c;
    c["tp"] = cov.tp;
    c["category"] = category_name(dl.categorize(cov.tp));
    c["total_cookies"] = cov.total_cookies;
    c["percent_by_topic"] = cov.percent_by_topic;
    cov_j.push_back(std::move(c));
  }
  report["top_tp_coverage"] = std::move(cov_j);

  ojson pa = ojson::array();
  for (const auto& [tp, topic] : preferential_attachment(matrix)) pa.push_back({{"tp", tp}, {"topic", topic}});
  report["preferential_attachment"] = std::move(pa);
  report["tracking_matrix"] = ojson::parse(matrix_to_json(matrix, "third_parties", true));
  return report.dump(2) + "\n";
}

}  // namespace dibets
