#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dibets/dictionary.hpp"
#include "dibets/embeddings.hpp"
#include "dibets/stopwords.hpp"
#include "dibets/thresholding.hpp"
#include "dibets/url.hpp"

namespace dibets {

enum class Method { Exact, Embedding, Other };

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

struct TopicAssignment {
  PageUrl url;
  std::string site;
  Topic topic;
  Method method = Method::Other;
  double score = 0.0;
  std::string matched_subpath;
};

struct BestSubpages {
  std::string site;
  std::map<std::string, PageUrl> selections;  // topic name -> URL
};

struct RankedCandidate {
  const TopicAssignment* assignment;
  double weight;
  std::size_t token_count;
};

/// Classifies subpage URLs against a dictionary and an embedding source.
///
/// Topic embeddings (the sum of all keyword token vectors per topic) are
/// computed once at construction, so a classifier can be shared across
/// threads afterwards. The dictionary, model and stopwords must outlive it.
class TopicClassifier {
 public:
  TopicClassifier(const TopicalDictionary& dictionary, const EmbeddingSource& model, const StopwordSet& stopwords,
                  double cutoff);

  /// Walks subpaths from the highest level down, skipping generic ones. An
  /// exact keyword hit wins immediately; otherwise the best-scoring topic is
  /// taken if its cosine clears the cutoff. Falls through to Other. Throws
  /// NoSubpaths for homepages.
  TopicAssignment classify(const PageUrl& url, std::string site = {}) const;

  /// Highest topic cosine of the first non-generic subpath (0 when none);
  /// the input for fitting the cosine cutoff.
  double max_score(const PageUrl& url) const;

  /// Ranking weight: cosine of all subpath tokens against the topic, divided
  /// by the token count (0 when there are no tokens).
  std::pair<double, std::size_t> weight(const PageUrl& url, const Topic& topic) const;

  /// Candidates ordered by descending weight, then shorter URL, then lexicographic.
  std::vector<RankedCandidate> rank(const std::vector<TopicAssignment>& candidates) const;

  /// Picks the single best URL for one topic of one site: the first ranked
  /// candidate whose highest-level subpath is a keyword of that topic, or
  /// the top-ranked one when none is. Throws EmptyCandidates.
  const PageUrl& select_best(const std::vector<TopicAssignment>& candidates) const;

  const Vector& topic_embedding(const Topic& topic) const;
  double cutoff() const { return cutoff_; }
  const TopicalDictionary& dictionary() const { return dictionary_; }

 private:
  std::pair<Topic, double> best_topic(const Vector& embedding) const;

  const TopicalDictionary& dictionary_;
  const EmbeddingSource& model_;
  const StopwordSet& stopwords_;
  double cutoff_;
  std::vector<std::pair<Topic, Vector>> topic_embeddings_;  // non-Other topics, name order
};

struct SiteInput {
  PageUrl homepage;
  std::vector<PageUrl> internal;
};

/// Filter, classify and select per site. Sites come back in input order;
/// homepage URLs (no subpaths) are skipped.
std::vector<BestSubpages> run_dibets(const std::vector<SiteInput>& sites, const TopicClassifier& classifier,
                                     const Thresholds& thresholds);

/// Groups non-Other assignments by (site, topic) and selects one URL each.
std::vector<BestSubpages> best_subpages(const std::vector<TopicAssignment>& assignments,
                                        const TopicClassifier& classifier);

/// Distinct non-generic subpaths of Other assignments with counts, most frequent first.
std::vector<std::pair<std::string, std::size_t>> dictionary_assist(const std::vector<TopicAssignment>& assignments,
                                                                   const TopicalDictionary* dictionary = nullptr);

std::string assignments_to_jsonl(const std::vector<TopicAssignment>& rows);
std::vector<TopicAssignment> parse_assignments(std::string_view text, const TopicalDictionary* dictionary = nullptr);
std::string best_subpages_to_jsonl(const std::vector<BestSubpages>& rows);
std::vector<BestSubpages> parse_best_subpages(std::string_view text);

}  // namespace dibets
