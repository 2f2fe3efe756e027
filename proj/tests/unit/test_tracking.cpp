#include <doctest.h>

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "dibets/error.hpp"
#include "dibets/io.hpp"
#include "dibets/tracking.hpp"

using namespace dibets;

namespace {

const std::string kDir = std::string(DIBETS_FIXTURE_DIR) + "/tracking/";

std::string record(const std::string& page, const std::string& topic, std::vector<std::string> cookie_domains,
                   const std::string& crawl = "c") {
  nlohmann::json j;
  j["page_url"] = page;
  j["site"] = normalize(page).domain;
  j["topic"] = topic;
  j["crawl_id"] = crawl;
  j["cookies"] = nlohmann::json::array();
  j["requests"] = nlohmann::json::array();
  int i = 0;
  for (const auto& d : cookie_domains) j["cookies"].push_back({{"name", "k" + std::to_string(i++)}, {"cookie_domain", d}});
  j["redirects"] = 0;
  return j.dump() + "\n";
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

}  // namespace

TEST_CASE("ingest recomputes third-party flags from registrable domains") {
  auto recs = ingest_logs(record("https://www.site.in/sports/", "sports",
                                 {".stats.g.doubleclick.net", "www.site.in", ".site.in", ".doubleclick.net"}));
  REQUIRE(recs.size() == 1);
  const auto& r = recs[0];
  CHECK(r.topic == "sports");
  CHECK(r.cookies[0].is_third_party);
  CHECK_FALSE(r.cookies[1].is_third_party);
  CHECK_FALSE(r.cookies[2].is_third_party);
  CHECK(r.third_party_cookie_count() == 2);
  CHECK(r.third_parties() == std::set<std::string>{"doubleclick.net"});
}

TEST_CASE("ingest errors carry line numbers") {
  std::string good = record("https://www.site.in/", "homepage", {});
  try {
    ingest_logs(good + "{\"page_url\": 3}\n");
    FAIL("expected MalformedRecord");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MalformedRecord);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(code_of([&] { ingest_logs(record("https://www.site.in/x/", "cooking", {}), {"sports"}); }) ==
        Errc::UnknownTopic);
  CHECK(ingest_logs(record("https://www.site.in/", "homepage", {}), {"sports"}).size() == 1);
}

TEST_CASE("disconnect categorization walks parent domains") {
  auto dl = DisconnectList::parse_tsv(io::read_file(kDir + "disconnect.tsv"));
  CHECK(dl.categorize("doubleclick.net") == Category::Advertising);
  CHECK(dl.categorize("stats.g.doubleclick.net") == Category::Advertising);
  CHECK(dl.categorize("intelcorp.demdex.net") == Category::Analytics);
  CHECK(dl.categorize("www.facebook.com") == Category::ContentSocial);
  CHECK(dl.categorize("notfacebook.com") == Category::Unknown);
  CHECK(dl.categorize("cricbuzz.com") == Category::Unknown);
  CHECK(category_name(Category::ContentSocial) == "Content&Social");
  CHECK(category_from_name("Fingerprinting") == Category::Fingerprinting);
  CHECK(code_of([] { DisconnectList::parse_tsv("only-one-column\n"); }) == Errc::MalformedDocument);

  std::string services = R"({"categories":{"Advertising":[{"Acme":{"http://acme.com/":["acme.com","acme-ads.net"]}}],
                              "Social":[{"Face":{"http://f.com/":["f.com"]}}]}})";
  auto tsv = DisconnectList::tsv_from_services_json(services);
  auto conv = DisconnectList::parse_tsv(tsv);
  CHECK(conv.categorize("acme-ads.net") == Category::Advertising);
  CHECK(conv.categorize("f.com") == Category::ContentSocial);
}

TEST_CASE("category breakdown and percent difference") {
  auto recs = ingest_logs(io::read_file(kDir + "crawl.jsonl"));
  auto dl = DisconnectList::parse_tsv(io::read_file(kDir + "disconnect.tsv"));
  auto expected = nlohmann::json::parse(io::read_file(kDir + "expected.json"))["categories"];
  auto b = category_breakdown(recs, dl);
  CHECK(b.size() == expected.size());
  for (const auto& [topic, counts] : expected.items()) {
    for (const auto& [cat, n] : counts.items()) {
      CAPTURE(topic);
      CAPTURE(cat);
      auto c = *category_from_name(cat);
      auto it = b.at(topic).find(c);
      CHECK((it == b.at(topic).end() ? 0 : it->second) == n.get<std::size_t>());
    }
  }

  Breakdown toy{{"homepage", {{Category::Advertising, 5}, {Category::Fingerprinting, 0}}},
                {"sports", {{Category::Advertising, 6}, {Category::Fingerprinting, 2}}}};
  auto pd = percent_diff_vs_homepage(toy);
  CHECK(std::get<double>(pd.at("sports").at(Category::Advertising)) == doctest::Approx(20.0));
  CHECK(std::get<std::string>(pd.at("sports").at(Category::Fingerprinting)) == "new");
  Breakdown no_home{{"sports", {{Category::Advertising, 1}}}};
  CHECK(code_of([&] { percent_diff_vs_homepage(no_home); }) == Errc::MissingStage);
}

TEST_CASE("breakdown restricted to top sites") {
  auto recs = ingest_logs(io::read_file(kDir + "crawl.jsonl"));
  auto dl = DisconnectList::parse_tsv(io::read_file(kDir + "disconnect.tsv"));
  std::set<std::string> sites{"a-news.in"};
  auto b = category_breakdown(recs, dl, &sites);
  // a-news.in homepage: doubleclick, taboola (Advertising), google-analytics, facebook, cricbuzz
  CHECK(b.at("homepage").at(Category::Advertising) == 2);
  CHECK(b.at("homepage").at(Category::Unknown) == 1);
}

TEST_CASE("tracking matrix matches the hand-built fixture") {
  auto recs = ingest_logs(io::read_file(kDir + "crawl.jsonl"));
  auto m = build_tracking_matrix(recs);
  auto expected = matrix_from_json(io::read_file(kDir + "expected_matrix.json"));
  CHECK(m.rows == expected.rows);
  CHECK(m.columns == expected.columns);
  CHECK(m == expected);
  for (Eigen::Index i = 0; i < m.cells.size(); ++i) {
    double v = m.cells.data()[i];
    CHECK((v == 0.0 || v == 1.0));
  }
  auto again = matrix_from_json(matrix_to_json(m, "third_parties", true));
  CHECK(again == m);
  CHECK(matrix_to_json(m, "third_parties", true).find("\"third_parties\"") != std::string::npos);

  // requested topics with no records become zero rows
  auto wider = build_tracking_matrix(recs, {"weather"});
  CHECK(std::find(wider.rows.begin(), wider.rows.end(), "weather") != wider.rows.end());
  CHECK(wider.cells.row(std::find(wider.rows.begin(), wider.rows.end(), "weather") - wider.rows.begin()).sum() == 0);
}

TEST_CASE("preferential attachment on the fixture") {
  auto recs = ingest_logs(io::read_file(kDir + "crawl.jsonl"));
  auto pa = preferential_attachment(build_tracking_matrix(recs));
  auto expected = nlohmann::json::parse(io::read_file(kDir + "expected.json"))["preferential_attachment"];
  REQUIRE(pa.size() == expected.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].first == expected[i][0].get<std::string>());
    CHECK(pa[i].second == expected[i][1].get<std::string>());
  }
}

TEST_CASE("top third-party coverage") {
  std::string logs;
  logs += record("https://www.a.in/sports/", "sports", {".t.com", ".t.com", ".u.com"});
  logs += record("https://www.b.in/sports/", "sports", {".t.com"});
  logs += record("https://www.c.in/sports/", "sports", {".t.com"});
  logs += record("https://www.d.in/sports/", "sports", {".u.com"});
  logs += record("https://www.a.in/", "homepage", {".u.com"});
  auto recs = ingest_logs(logs);
  auto top = top_tp_coverage(recs, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].tp == "t.com");
  CHECK(top[0].total_cookies == 4);
  CHECK(top[0].percent_by_topic.at("sports") == doctest::Approx(75.0));
  CHECK(top[0].percent_by_topic.at("homepage") == doctest::Approx(0.0));
  CHECK(top_tp_coverage(recs, 5).size() == 2);
  CHECK(code_of([&] { top_tp_coverage(recs, 0); }) == Errc::InvalidArgument);

  auto stats = cookie_stats_by_topic(recs);
  CHECK(stats.at("sports").count == 4);
  CHECK(stats.at("sports").max == 3);
}

TEST_CASE("tracking report document") {
  auto recs = ingest_logs(io::read_file(kDir + "crawl.jsonl"));
  auto dl = DisconnectList::parse_tsv(io::read_file(kDir + "disconnect.tsv"));
  TrackingReportOptions opt;
  opt.top_sites = {"a-news.in", "b-times.com"};
  opt.top_k = 3;
  auto j = nlohmann::json::parse(tracking_report_json(recs, dl, opt));
  CHECK(j["record_count"] == 25);
  CHECK(j["third_party_count"] == 9);
  CHECK(j["topics"].size() == 5);
  CHECK(j["cookie_stats"]["sports"].contains("ks_vs_homepage"));
  CHECK_FALSE(j["cookie_stats"]["homepage"].contains("ks_vs_homepage"));
  CHECK(j["category_breakdown"]["all"]["politics"]["Fingerprinting"] == 1);
  CHECK(j["category_breakdown"]["top_sites"].contains("homepage"));
  CHECK(j["percent_diff"]["politics"]["Fingerprinting"] == "new");
  CHECK(j["top_tp_coverage"].size() == 3);
  CHECK(tracking_report_json(recs, dl, opt) == tracking_report_json(recs, dl, opt));
}

TEST_CASE("property: tracking invariants on shuffled fixture records") {
  auto text = io::read_file(kDir + "crawl.jsonl");
  auto recs = ingest_logs(text);
  auto dl = DisconnectList::parse_tsv(io::read_file(kDir + "disconnect.tsv"));
  auto base = build_tracking_matrix(recs);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = recs;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(build_tracking_matrix(shuffled) == base);
  }
  for (const auto& [tp, topic] : preferential_attachment(base)) {
    auto c = std::find(base.columns.begin(), base.columns.end(), tp) - base.columns.begin();
    double hits = 0;
    for (std::size_t r = 0; r < base.rows.size(); ++r) {
      if (base.rows[r] != kHomepageTopic) hits += base.cells(static_cast<Eigen::Index>(r), c);
    }
    CHECK(hits == 1.0);
    CHECK(base.at(topic, tp) == 1.0);
  }
  auto b = category_breakdown(recs, dl);
  for (const auto& [topic, counts] : b) {
    std::size_t sum = 0;
    for (const auto& [_, n] : counts) sum += n;
    auto r = std::find(base.rows.begin(), base.rows.end(), topic) - base.rows.begin();
    CHECK(sum == static_cast<std::size_t>(base.cells.row(r).sum()));
  }
}
