#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dibets/labeled_matrix.hpp"
#include "dibets/stopwords.hpp"

namespace dibets {

struct TopicDocument {
  std::string topic;
  std::string text;
};

// Visible text of an HTML page (script/style removed, whitespace collapsed).
std::string extract_text(std::string_view html);

/// Case-folds, strips accents (NFD minus combining marks), splits on
/// non-alphanumerics, stems with Porter and drops stopwords (checked on the
/// surface form and on the stem). Digit runs are kept.
std::vector<std::string> preprocess(std::string_view text, const StopwordSet& stopwords);

/// tf = count / document length, idf = ln(N / df), weight = tf * idf.
/// Terms are sorted; terms with df < min_df are dropped. Throws EmptyCorpus.
LabeledMatrix tfidf(const std::vector<TopicDocument>& docs, const StopwordSet& stopwords, std::size_t min_df = 1);

// Same, over already-tokenized documents.
LabeledMatrix tfidf_tokens(const std::vector<std::string>& topics, const std::vector<std::vector<std::string>>& docs,
                           std::size_t min_df = 1);

struct LanguageVerdict {
  bool english = false;
  bool confident = false;     // false below 40 characters
  double latin_share = 0.0;   // Basic Latin letters / all letters
  double stopword_share = 0.0;
};

LanguageVerdict detect_english(std::string_view text);

}  // namespace dibets
