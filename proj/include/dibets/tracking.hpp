#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dibets/labeled_matrix.hpp"
#include "dibets/public_suffix.hpp"
#include "dibets/stats.hpp"
#include "dibets/url.hpp"

namespace dibets {

inline constexpr std::string_view kHomepageTopic = "homepage";

struct Cookie {
  std::string name;
  std::string cookie_domain;
  bool is_third_party = false;
};

struct Request {
  std::string request_domain;
  bool is_third_party = false;
};

/// One stateless page visit.
struct CrawlRecord {
  PageUrl page_url;
  std::string site;
  std::string topic;  // a dictionary topic or "homepage"
  std::string crawl_id;
  std::vector<Cookie> cookies;
  std::vector<Request> requests;
  std::size_t redirects = 0;

  // Distinct third-party registrable domains seen via cookies or requests.
  std::set<std::string> third_parties(const PublicSuffixList& psl = PublicSuffixList::builtin()) const;
  std::size_t third_party_cookie_count() const;
};

/// Parses crawl-log JSON Lines. Third-party flags are recomputed from
/// registrable domains. When `topics` is non-empty, a topic outside it (and
/// other than "homepage") raises UnknownTopic. Errors carry the line number.
std::vector<CrawlRecord> ingest_logs(std::string_view jsonl, const std::set<std::string>& topics = {},
                                     const PublicSuffixList& psl = PublicSuffixList::builtin());

enum class Category { Advertising, ContentSocial, Analytics, Fingerprinting, Unknown };

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);
inline constexpr Category kAllCategories[] = {Category::Advertising, Category::ContentSocial, Category::Analytics,
                                              Category::Fingerprinting, Category::Unknown};

class DisconnectList {
 public:
  /// Two tab-separated columns: domain, category. '#' comments allowed.
  static DisconnectList parse_tsv(std::string_view text);
  /// Converts the upstream services JSON ({"categories": {Name: [{company:
  /// {homepage: [domains]}}]}}) into the canonical TSV.
  static std::string tsv_from_services_json(std::string_view text);

  void add(std::string domain, Category category) { entries_.insert_or_assign(std::move(domain), category); }
  /// Exact host first, then each parent domain, so subdomains inherit.
  Category categorize(std::string_view domain) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Category, std::less<>> entries_;
};

using CategoryCounts = std::map<Category, std::size_t>;
using Breakdown = std::map<std::string, CategoryCounts>;  // topic -> category -> distinct TPs

std::map<std::string, std::vector<double>> cookie_counts_by_topic(const std::vector<CrawlRecord>& records);
std::map<std::string, stats::Summary> cookie_stats_by_topic(const std::vector<CrawlRecord>& records);

/// Distinct third parties per topic and category. With `sites`, only records
/// of those sites count.
Breakdown category_breakdown(const std::vector<CrawlRecord>& records, const DisconnectList& dl,
                             const std::set<std::string>* sites = nullptr,
                             const PublicSuffixList& psl = PublicSuffixList::builtin());

/// A percentage, or "new" when the homepage count is zero but the topic's is not.
using PercentDiff = std::variant<double, std::string>;

/// 100*(topic - homepage)/homepage per category. Throws MissingStage when the
/// breakdown has no homepage row.
std::map<std::string, std::map<Category, PercentDiff>> percent_diff_vs_homepage(const Breakdown& breakdown);

/// Rows are `topics` plus any topic seen in records (sorted, "homepage"
/// included); columns are all third parties (sorted).
LabeledMatrix build_tracking_matrix(const std::vector<CrawlRecord>& records, const std::set<std::string>& topics = {},
                                    const PublicSuffixList& psl = PublicSuffixList::builtin());

struct TpCoverage {
  std::string tp;
  std::size_t total_cookies = 0;
  std::map<std::string, double> percent_by_topic;
};

/// Top `k` third parties by cookies set; per topic, the percentage of that
/// topic's page visits on which the TP appears.
std::vector<TpCoverage> top_tp_coverage(const std::vector<CrawlRecord>& records, std::size_t k,
                                        const PublicSuffixList& psl = PublicSuffixList::builtin());

/// Third parties present on exactly one non-homepage topic row, sorted by TP.
std::vector<std::pair<std::string, std::string>> preferential_attachment(const LabeledMatrix& tracking);

struct TrackingReportOptions {
  std::set<std::string> topics;
  std::set<std::string> top_sites;
  std::size_t top_k = 10;
};

/// The complete tracking-report.json document.
std::string tracking_report_json(const std::vector<CrawlRecord>& records, const DisconnectList& dl,
                                 const TrackingReportOptions& options,
                                 const PublicSuffixList& psl = PublicSuffixList::builtin());

}  // namespace dibets
