#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <nlohmann/json.hpp>

#include "dibets/classifier.hpp"
#include "dibets/error.hpp"
#include "dibets/io.hpp"

using namespace dibets;

namespace {

const std::string kFixtures = std::string(DIBETS_FIXTURE_DIR) + "/classifier/";

struct Toy {
  TopicalDictionary dict = TopicalDictionary::parse(io::read_file(kFixtures + "toy_dict.json"));
  EmbeddingModel model = EmbeddingModel::parse(io::read_file(kFixtures + "toy_vectors.txt"));
  StopwordSet stop = default_stopwords();
};

// Counts lookups so tests can see whether embeddings were consulted.
class CountingSource : public EmbeddingSource {
 public:
  explicit CountingSource(const EmbeddingSource& inner) : inner_(inner) {}
  std::size_t dimension() const override { return inner_.dimension(); }
  std::span<const double> find(std::string_view token) const override {
    ++calls;
    return inner_.find(token);
  }
  mutable std::size_t calls = 0;

 private:
  const EmbeddingSource& inner_;
};

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

TopicAssignment cand(const std::string& url, const std::string& topic) {
  TopicAssignment a;
  a.url = normalize(url);
  a.site = a.url.domain;
  a.topic = Topic{topic, false};
  a.method = Method::Embedding;
  return a;
}

}  // namespace

TEST_CASE("dictionary parsing") {
  Toy t;
  CHECK(t.dict.topics().size() == 6);
  CHECK(t.dict.other().name == "other");
  CHECK(t.dict.keyword_count() == 20);
  CHECK(t.dict.topic_of_keyword("tennis")->name == "sports");
  CHECK_FALSE(t.dict.topic_of_keyword("cricket"));
  CHECK(t.dict.is_generic("news"));
  CHECK(code_of([] { TopicalDictionary::parse(R"({"topics":{"a":["x"],"b":["x"]}})"); }) == Errc::DuplicateKeyword);
  CHECK(code_of([] { TopicalDictionary::parse(R"({"topics":{}})"); }) == Errc::EmptyTopicSet);
  CHECK(code_of([] { TopicalDictionary::parse("[1,2]"); }) == Errc::MalformedDocument);
  CHECK(code_of([] { TopicalDictionary::parse("{not json"); }) == Errc::MalformedDocument);
}

TEST_CASE("the shipped example dictionary loads") {
  auto d = TopicalDictionary::parse(io::read_file(std::string(DIBETS_DATA_DIR) + "/dictionary.example.json"));
  CHECK(d.topics().size() == 16);
  CHECK(d.find_topic("sports"));
  CHECK(d.topic_of_keyword("manoranjan")->name == "entertainment");
}

TEST_CASE("embedding model parsing") {
  auto m = EmbeddingModel::parse("2 3\nA 1 0 0\nb 0 1 0\na 9 9 9\n");
  CHECK(m.dimension() == 3);
  CHECK(m.size() == 2);
  auto a = m.find("a");
  REQUIRE(a.size() == 3);
  CHECK(a[0] == 1.0);
  CHECK(m.find("zz").empty());
  CHECK(code_of([] { EmbeddingModel::parse("oops\nx 1\n"); }) == Errc::MalformedHeader);
  CHECK(code_of([] { EmbeddingModel::parse(""); }) == Errc::MalformedHeader);
  try {
    EmbeddingModel::parse("2 2\nx 1 2\ny 1\n");
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DimensionMismatch);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("tokenize, combine and cosine") {
  auto stop = default_stopwords();
  CHECK(tokenize_subpath("covid-19", stop) == std::vector<std::string>{"covid", "19"});
  CHECK(tokenize_subpath("The-Best-of-Sports", stop) == std::vector<std::string>{"best", "sports"});
  CHECK(tokenize_subpath("a_b.c", StopwordSet{}) == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize_subpath("--", stop).empty());
  std::vector<double> x{1, 0}, y{1, 1}, z{0, 0};
  CHECK(cosine(x, y) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(cosine(x, z) == 0.0);
  std::vector<double> w{1, 2, 3};
  CHECK(code_of([&] { cosine(x, w); }) == Errc::DimensionMismatch);
  Toy t;
  std::vector<std::string> toks{"sports", "zzz", "tennis"};
  auto v = combined_embedding(toks, t.model);
  CHECK(v == std::vector<double>{2.5, 0.0});
  std::vector<std::string> none{"zzz"};
  CHECK(combined_embedding(none, t.model) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("classify examples on the toy fixture") {
  Toy t;
  TopicClassifier c(t.dict, t.model, t.stop, 0.4);
  auto exact = c.classify(normalize("https://ex.com/sports/cricket/"));
  CHECK(exact.topic.name == "sports");
  CHECK(exact.method == Method::Exact);
  CHECK(exact.site == "ex.com");

  auto emb = c.classify(normalize("https://ex.com/news/cricket/"), "ex.com");
  CHECK(emb.topic.name == "sports");
  CHECK(emb.method == Method::Embedding);
  CHECK(emb.score == doctest::Approx(0.9));
  CHECK(emb.matched_subpath == "cricket");

  CHECK(c.topic_embedding(Topic{"sports"}) == std::vector<double>{5.0, 0.0});
  double to_politics = cosine(t.model.find("cricket"), c.topic_embedding(Topic{"politics"}));
  CHECK(to_politics == doctest::Approx(0.1));

  auto other = c.classify(normalize("https://ex.com/category/zzqq/"));
  CHECK(other.topic.is_other);
  CHECK(other.method == Method::Other);

  // first non-generic subpath decides; later ones are fallbacks
  auto second = c.classify(normalize("https://ex.com/zzqq/elections/"));
  CHECK(second.topic.name == "politics");
  CHECK(second.matched_subpath == "elections");

  CHECK(code_of([&] { c.classify(normalize("https://ex.com/")); }) == Errc::NoSubpaths);
  CHECK(code_of([&] { TopicClassifier(t.dict, t.model, t.stop, 1.5); }) == Errc::InvalidArgument);
}

TEST_CASE("cosine cutoff boundary") {
  Toy t;
  double s = cosine(t.model.find("batting"), std::vector<double>{1, 0});
  REQUIRE(s == doctest::Approx(0.8106).epsilon(1e-3));
  auto url = normalize("https://ex.com/batting/");
  CHECK(TopicClassifier(t.dict, t.model, t.stop, 0.85).classify(url).topic.is_other);
  CHECK(TopicClassifier(t.dict, t.model, t.stop, 0.8).classify(url).topic.name == "sports");
  // the cutoff itself is inclusive
  CHECK(TopicClassifier(t.dict, t.model, t.stop, s).classify(url).topic.name == "sports");
  CHECK(TopicClassifier(t.dict, t.model, t.stop, 0.4).max_score(url) == doctest::Approx(s));
}

TEST_CASE("exact keyword hits never consult embeddings") {
  Toy t;
  CountingSource counting(t.model);
  TopicClassifier c(t.dict, counting, t.stop, 0.4);
  counting.calls = 0;
  auto a = c.classify(normalize("https://ex.com/Football/"));
  CHECK(a.method == Method::Exact);
  CHECK(counting.calls == 0);
  c.classify(normalize("https://ex.com/cricket/"));
  CHECK(counting.calls > 0);
}

TEST_CASE("property: topic choice is invariant to vector scale") {
  Toy t;
  auto scaled = t.model.scaled(7.3);
  TopicClassifier a(t.dict, t.model, t.stop, 0.3), b(t.dict, scaled, t.stop, 0.3);
  for (const char* u : {"https://ex.com/cricket/", "https://ex.com/batting/", "https://ex.com/food-and-fitness/",
                        "https://ex.com/cricket-tennis/", "https://ex.com/markets-live/", "https://ex.com/zz/"}) {
    auto x = a.classify(normalize(u)), y = b.classify(normalize(u));
    CHECK(x.topic == y.topic);
    CHECK(x.score == doctest::Approx(y.score).epsilon(1e-12));
  }
}

TEST_CASE("select_best follows ranking with the dictionary-first override") {
  Toy t;
  TopicClassifier c(t.dict, t.model, t.stop, 0.4);
  auto doc = nlohmann::json::parse(io::read_file(kFixtures + "best_cases.json"));
  std::string topic = doc["topic"];
  for (const auto& tc : doc["cases"]) {
    CAPTURE(tc["name"].get<std::string>());
    std::vector<TopicAssignment> cands;
    for (const auto& u : tc["urls"]) cands.push_back(cand(u.get<std::string>(), topic));
    CHECK(c.select_best(cands).normalized == tc["expected"].get<std::string>());
  }
  auto [w, n] = c.weight(normalize("https://ex.com/cricket-news/"), Topic{"sports"});
  CHECK(n == 2);
  CHECK(w == doctest::Approx(0.45));
  CHECK(code_of([&] { c.select_best({}); }) == Errc::EmptyCandidates);
  CHECK(w == doctest::Approx(cosine(t.model.find("cricket"), std::vector<double>{5, 0}) / 2).epsilon(1e-12));
}

TEST_CASE("ranking ties break on shorter URL then lexicographic order") {
  Toy t;
  TopicClassifier c(t.dict, t.model, t.stop, 0.4);
  std::vector<TopicAssignment> cands{cand("https://ex.com/zz/tennis/", "sports"), cand("https://ex.com/aa/tennis/", "sports"),
                                     cand("https://ex.com/tennis/", "sports")};
  auto r = c.rank(cands);
  CHECK(r[0].assignment->url.normalized == "https://ex.com/tennis/");
  CHECK(r[1].assignment->url.normalized == "https://ex.com/aa/tennis/");
  CHECK(r[2].assignment->url.normalized == "https://ex.com/zz/tennis/");
}

TEST_CASE("run_dibets end to end on a small site") {
  Toy t;
  TopicClassifier c(t.dict, t.model, t.stop, 0.4);
  SiteInput site{normalize("https://www.ex.com/"), {}};
  for (const char* u : {"https://www.ex.com/sports/", "https://www.ex.com/cricket/", "https://www.ex.com/politics/",
                        "https://www.ex.com/a-very-long-article-about-the-elections-in-some-state-today/",
                        "https://www.ex.com/", "https://www.ex.com/zzqq/"}) {
    site.internal.push_back(normalize(u));
  }
  auto out = run_dibets({site}, c, kDefaultThresholds);
  REQUIRE(out.size() == 1);
  CHECK(out[0].site == "ex.com");
  CHECK(out[0].selections.size() == 2);
  CHECK(out[0].selections.at("sports").normalized == "https://www.ex.com/sports/");
  CHECK(out[0].selections.at("politics").normalized == "https://www.ex.com/politics/");

  for (const auto& [topic, url] : out[0].selections) {
    CHECK(topic != t.dict.other().name);
    CHECK(std::find(site.internal.begin(), site.internal.end(), url) != site.internal.end());
  }

  SiteInput empty{normalize("https://www.none.com/"), {normalize("https://www.none.com/zzqq/")}};
  auto none = run_dibets({empty}, c, kDefaultThresholds);
  REQUIRE(none.size() == 1);
  CHECK(none[0].selections.empty());
}

TEST_CASE("dictionary_assist counts unmatched subpaths") {
  Toy t;
  TopicClassifier c(t.dict, t.model, t.stop, 0.4);
  std::vector<TopicAssignment> rows;
  for (const char* u : {"https://ex.com/zzqq/", "https://ex.com/news/zzqq/", "https://ex.com/yy/", "https://ex.com/sports/"}) {
    rows.push_back(c.classify(normalize(u)));
  }
  auto got = dictionary_assist(rows, &t.dict);
  REQUIRE(got.size() == 2);
  CHECK(got[0] == std::pair<std::string, std::size_t>{"zzqq", 2});
  CHECK(got[1] == std::pair<std::string, std::size_t>{"yy", 1});
}

TEST_CASE("assignment and best-subpage JSONL round trips") {
  Toy t;
  TopicClassifier c(t.dict, t.model, t.stop, 0.4);
  std::vector<TopicAssignment> rows;
  for (const char* u : {"https://ex.com/sports/", "https://ex.com/cricket/", "https://ex.com/zzqq/"}) {
    rows.push_back(c.classify(normalize(u)));
  }
  auto text = assignments_to_jsonl(rows);
  auto back = parse_assignments(text, &t.dict);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].url == rows[i].url);
    CHECK(back[i].topic == rows[i].topic);
    CHECK(back[i].method == rows[i].method);
    CHECK(back[i].score == rows[i].score);
  }
  CHECK(assignments_to_jsonl(back) == text);
  CHECK(code_of([] { parse_assignments("{\"url\":1}\n"); }) == Errc::MalformedRecord);
  CHECK(code_of([&] {
          parse_assignments(R"({"url":"https://ex.com/a/","site":"ex.com","topic":"nope","method":"exact"})", &t.dict);
        }) == Errc::UnknownTopic);

  auto best = best_subpages(rows, c);
  auto btext = best_subpages_to_jsonl(best);
  CHECK(best_subpages_to_jsonl(parse_best_subpages(btext)) == btext);
}

TEST_CASE("property: select_best returns one of its candidates") {
  Toy t;
  TopicClassifier c(t.dict, t.model, t.stop, 0.4);
  const char* pool[] = {"https://ex.com/sports/", "https://ex.com/cricket/", "https://ex.com/tennis-live/",
                        "https://ex.com/batting-tips/", "https://ex.com/zz/football/", "https://ex.com/cricket-news/"};
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TopicAssignment> cands;
    for (const char* u : pool) {
      if (rng() % 2) cands.push_back(cand(u, "sports"));
    }
    if (cands.empty()) continue;
    const auto& best = c.select_best(cands);
    CHECK(std::any_of(cands.begin(), cands.end(), [&](const TopicAssignment& a) { return a.url == best; }));
  }
}
