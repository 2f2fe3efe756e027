#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dibets/content.hpp"
#include "dibets/error.hpp"
#include "dibets/io.hpp"
#include "dibets/stemmer.hpp"

using namespace dibets;

using Tokens = std::vector<std::string>;

TEST_CASE("extract_text drops markup and scripts") {
  CHECK(extract_text("<p>Hi <b>there</b></p><script>var x = '<p>no</p>';</script>") == "Hi there");
  CHECK(extract_text("<html><style>p{}</style><body>\n  a\n\n b </body></html>") == "a b");
  CHECK(extract_text("") == "");
}

TEST_CASE("Porter stemmer reference pairs") {
  const std::pair<const char*, const char*> cases[] = {
      {"caresses", "caress"}, {"ponies", "poni"},     {"cats", "cat"},           {"feed", "feed"},
      {"agreed", "agre"},     {"plastered", "plaster"}, {"motoring", "motor"},   {"hopping", "hop"},
      {"falling", "fall"},    {"filing", "file"},     {"happy", "happi"},        {"relational", "relat"},
      {"conditional", "condit"}, {"digitizer", "digit"}, {"operator", "oper"},   {"hopefulness", "hope"},
      {"formalize", "formal"}, {"electrical", "electr"}, {"adjustable", "adjust"}, {"controll", "control"},
      {"generalizations", "gener"}, {"cases", "case"}, {"economie", "economi"}, {"is", "is"}};
  for (auto [in, out] : cases) {
    CAPTURE(in);
    CHECK(porter_stem(in) == out);
  }
}

TEST_CASE("preprocess folds, strips accents, stems and drops stopwords") {
  const auto& sw = default_stopwords();
  CHECK(preprocess("Économie!", sw) == Tokens{"economi"});
  CHECK(preprocess("covid-19 cases, cases", sw) == Tokens{"covid", "19", "case", "case"});
  CHECK(preprocess("The and of", sw).empty());
  CHECK(preprocess("", sw).empty());
}

TEST_CASE("property: preprocess is idempotent on its own output") {
  const auto& sw = default_stopwords();
  // Porter is not idempotent everywhere ("databases" -> "databas" -> "databa"), so the vocabulary avoids such words.
  for (const char* text : {"Running runners ran quickly through the generalizations of relational tables",
                           "Cricket: India beat Australia by 5 wickets in Mumbai", "Économie et société, café",
                           "Elections, parliament sessions and government policies were debated",
                           "Health and fitness tips: eating healthy food for wellness"}) {
    CAPTURE(text);
    auto once = preprocess(text, sw);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    CHECK(preprocess(joined, sw) == once);
  }
}

TEST_CASE("tfidf examples") {
  auto m = tfidf_tokens({"a", "b"}, {{"apple", "banana"}, {"banana", "cherry"}});
  CHECK(m.columns == Tokens{"apple", "banana", "cherry"});
  CHECK(m.at("a", "apple") == doctest::Approx(0.5 * std::log(2.0)));
  CHECK(m.at("a", "banana") == 0.0);
  CHECK(m.at("b", "banana") == 0.0);
  CHECK(m.at("a", "cherry") == 0.0);
  CHECK(m.at("b", "cherry") == doctest::Approx(0.5 * std::log(2.0)));

  auto all = tfidf_tokens({"x", "y", "z"}, {{"w"}, {"w", "w"}, {"w"}});
  CHECK(all.cells.isZero());

  auto pruned = tfidf_tokens({"a", "b"}, {{"apple", "banana"}, {"banana", "cherry"}}, 2);
  CHECK(pruned.columns == Tokens{"banana"});

  CHECK_THROWS_AS(tfidf_tokens({}, {}), Error);
  try {
    tfidf({}, default_stopwords());
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyCorpus);
  }
}

TEST_CASE("property: tf-idf weight is zero exactly for shared or absent terms") {
  std::vector<std::vector<std::string>> docs{{"a", "b", "c", "shared"}, {"b", "shared", "d"}, {"shared", "e", "a", "a"}};
  auto m = tfidf_tokens({"t1", "t2", "t3"}, docs);
  for (std::size_t c = 0; c < m.columns.size(); ++c) {
    std::size_t df = 0;
    for (const auto& d : docs) df += std::count(d.begin(), d.end(), m.columns[c]) > 0;
    for (std::size_t r = 0; r < docs.size(); ++r) {
      bool present = std::count(docs[r].begin(), docs[r].end(), m.columns[c]) > 0;
      double w = m.cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      CHECK(w >= 0.0);
      CHECK((w == 0.0) == (!present || df == docs.size()));
    }
  }
  auto back = matrix_from_json(matrix_to_json(m, "terms", false));
  CHECK(back == m);
  CHECK((back.cells.array() == m.cells.array()).all());
}

TEST_CASE("tfidf from raw documents matches the tokenized path") {
  const auto& sw = default_stopwords();
  std::vector<TopicDocument> docs{{"sports", "Cricket scores and cricket news"}, {"politics", "Election results"}};
  auto m = tfidf(docs, sw);
  auto t = tfidf_tokens({"sports", "politics"}, {preprocess(docs[0].text, sw), preprocess(docs[1].text, sw)});
  CHECK(m == t);
  CHECK(m.at("sports", "cricket") == doctest::Approx(0.5 * std::log(2.0)));
}

TEST_CASE("detect_english") {
  auto en = detect_english("The government announced that the new policy will be implemented from next month in all states.");
  CHECK(en.english);
  CHECK(en.confident);
  auto hi = detect_english("सरकार ने घोषणा की कि नई नीति अगले महीने से सभी राज्यों में लागू की जाएगी और इसका असर होगा");
  CHECK_FALSE(hi.english);
  CHECK(hi.confident);
  auto short_ = detect_english("Hello there");
  CHECK_FALSE(short_.confident);
}

TEST_CASE("the built-in stopword list and the data file agree") {
  CHECK(default_stopwords().size() == 179);
  auto file = parse_stopwords(io::read_file(std::string(DIBETS_DATA_DIR) + "/stopwords_en.txt"));
  CHECK(file == default_stopwords());
  CHECK(parse_stopwords("# c\nThe\n\nof\n") == StopwordSet{"the", "of"});
}
