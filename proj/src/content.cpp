#include "dibets/content.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "dibets/error.hpp"
#include "dibets/html.hpp"
#include "dibets/stemmer.hpp"

namespace dibets {
namespace {

// Lowercased, accent-stripped text as a sequence of code points.
std::vector<UChar32> fold(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s.foldCase();
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  if (U_SUCCESS(status)) {
    icu::UnicodeString decomposed = nfd->normalize(s, status);
    if (U_SUCCESS(status)) s = decomposed;
  }
  std::vector<UChar32> out;
  out.reserve(static_cast<std::size_t>(s.length()));
  for (int32_t i = 0; i < s.length();) {
    UChar32 cp = s.char32At(i);
    i += U16_LENGTH(cp);
    if (u_charType(cp) == U_NON_SPACING_MARK) continue;
    out.push_back(cp);
  }
  return out;
}

void append_utf8(std::string& out, UChar32 cp) {
  icu::UnicodeString one(cp);
  one.toUTF8String(out);
}

std::vector<std::string> split_words(const std::vector<UChar32>& cps) {
  std::vector<std::string> words;
  std::string current;
  for (UChar32 cp : cps) {
    if (u_isalnum(cp) || u_charType(cp) == U_COMBINING_SPACING_MARK) {
      append_utf8(current, cp);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace

std::string extract_text(std::string_view html_doc) { return html::visible_text(html_doc); }

std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords) {
  std::vector<std::string> out;
  for (auto& word : split_words(fold(text))) {
    if (stopwords.count(word)) continue;
    std::string stem = porter_stem(word);
    if (stem.empty() || stopwords.count(stem)) continue;
    out.push_back(std::move(stem));
  }
  return out;
}

LabeledMatrix tfidf_tokens(const std::vector<std::string>& topics, const std::vector<std::vector<std::string>>& docs,
                           std::size_t min_df) {
  if (docs.empty()) throw Error(Errc::EmptyCorpus, "no documents");
  if (topics.size() != docs.size()) throw Error(Errc::LengthMismatch, "topics vs documents");
  std::set<std::string> unique_topics(topics.begin(), topics.end());
  if (unique_topics.size() != topics.size()) throw Error(Errc::InvalidArgument, "one document per topic");

  std::vector<std::map<std::string, std::size_t>> counts(docs.size());
  std::map<std::string, std::size_t> df;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& t : docs[d]) ++counts[d][t];
    for (const auto& [t, _] : counts[d]) ++df[t];
  }
  LabeledMatrix m;
  m.rows = topics;
  for (const auto& [t, n] : df) {
    if (n >= min_df) m.columns.push_back(t);
  }
  m.cells = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(m.columns.size()));
  const double n_docs = static_cast<double>(docs.size());
  for (std::size_t c = 0; c < m.columns.size(); ++c) {
    const std::string& term = m.columns[c];
    const double idf = std::log(n_docs / static_cast<double>(df[term]));
    for (std::size_t d = 0; d < docs.size(); ++d) {
      auto it = counts[d].find(term);
      if (it == counts[d].end()) continue;
      const double tf = static_cast<double>(it->second) / static_cast<double>(docs[d].size());
      m.cells(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(c)) = tf * idf;
    }
  }
  return m;
}

LabeledMatrix tfidf(const std::vector<TopicDocument>& docs, const StopwordSet& stopwords, std::size_t min_df) {
  if (docs.empty()) throw Error(Errc::EmptyCorpus, "no documents");
  std::vector<std::string> topics;
  std::vector<std::vector<std::string>> tokens;
  for (const auto& d : docs) {
    topics.push_back(d.topic);
    tokens.push_back(preprocess(d.text, stopwords));
  }
  return tfidf_tokens(topics, tokens, min_df);
}

LanguageVerdict detect_english(std::string_view text) {
  LanguageVerdict v;
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  std::size_t letters = 0, latin = 0, devanagari = 0;
  for (int32_t i = 0; i < s.length();) {
    UChar32 cp = s.char32At(i);
    i += U16_LENGTH(cp);
    // Devanagari vowel signs are combining marks; count them with the script.
    bool letter = u_isalpha(cp) || (cp >= 0x0900 && cp <= 0x097F);
    if (!letter) continue;
    ++letters;
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) ++latin;
    if (cp >= 0x0900 && cp <= 0x097F) ++devanagari;
  }
  v.confident = s.countChar32() >= 40;
  if (letters == 0) return v;
  v.latin_share = static_cast<double>(latin) / static_cast<double>(letters);

  auto words = split_words(fold(text));
  if (!words.empty()) {
    const auto& sw = default_stopwords();
    auto hits = std::count_if(words.begin(), words.end(), [&](const std::string& w) { return sw.count(w) > 0; });
    v.stopword_share = static_cast<double>(hits) / static_cast<double>(words.size());
  }
  bool devanagari_majority = 2 * devanagari > letters;
  v.english = !devanagari_majority && v.latin_share >= 0.9 && v.stopword_share >= 0.03;
  return v;
}

}  // namespace dibets
