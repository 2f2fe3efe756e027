#include "dibets/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <json.hpp>

#include "dibets/error.hpp"
#include "dibets/io.hpp"

namespace dibets {
namespace {

using json = nlohmann::json;

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Embedding: return "embedding";
    case Method::Other: return "other";
  }
  return "other";
}

Method method_from_name(std::string_view name) {
  if (name == "exact") return Method::Exact;
  if (name == "embedding") return Method::Embedding;
  if (name == "other") return Method::Other;
  throw Error(Errc::MalformedRecord, "unknown method '" + std::string(name) + "'");
}

TopicClassifier::TopicClassifier(const TopicalDictionary& dictionary, const EmbeddingSource& model,
                                 const StopwordSet& stopwords, double cutoff)
    : dictionary_(dictionary), model_(model), stopwords_(stopwords), cutoff_(cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw Error(Errc::InvalidArgument, "cosine cutoff must lie in [0,1]");
  for (const Topic& topic : dictionary_.topics()) {
    if (topic.is_other) continue;
    std::vector<std::string> tokens;
    for (const auto& kw : dictionary_.keywords(topic)) {
      auto t = tokenize_subpath(kw, stopwords_);
      tokens.insert(tokens.end(), t.begin(), t.end());
    }
    topic_embeddings_.emplace_back(topic, combined_embedding(tokens, model_));
  }
}

const Vector& TopicClassifier::topic_embedding(const Topic& topic) const {
  for (const auto& [t, v] : topic_embeddings_) {
    if (t.name == topic.name) return v;
  }
  throw Error(Errc::UnknownTopic, topic.name);
}

std::pair<Topic, double> TopicClassifier::best_topic(const Vector& embedding) const {
  std::pair<Topic, double> best{dictionary_.other(), 0.0};
  bool first = true;
  for (const auto& [topic, vec] : topic_embeddings_) {
    double c = cosine(embedding, vec);
    if (first || c > best.second) {
      best = {topic, c};
      first = false;
    }
  }
  return best;
}

TopicAssignment TopicClassifier::classify(const PageUrl& url, std::string site) const {
  if (url.subpaths.empty()) throw Error(Errc::NoSubpaths, url.normalized);
  TopicAssignment a;
  a.url = url;
  a.site = site.empty() ? url.domain : std::move(site);
  for (const std::string& subpath : url.subpaths) {
    std::string key = lowercase_ascii(subpath);
    if (dictionary_.is_generic(key)) continue;
    if (auto topic = dictionary_.topic_of_keyword(key)) {
      a.topic = *topic;
      a.method = Method::Exact;
      a.score = 1.0;
      a.matched_subpath = subpath;
      return a;
    }
    auto tokens = tokenize_subpath(subpath, stopwords_);
    Vector emb = combined_embedding(tokens, model_);
    auto [topic, score] = best_topic(emb);
    // A zero embedding carries no information and never clears the cutoff.
    if (score > 0.0 && score >= cutoff_) {
      a.topic = topic;
      a.method = Method::Embedding;
      a.score = score;
      a.matched_subpath = subpath;
      return a;
    }
  }
  a.topic = dictionary_.other();
  a.method = Method::Other;
  a.score = 0.0;
  return a;
}

double TopicClassifier::max_score(const PageUrl& url) const {
  for (const std::string& subpath : url.subpaths) {
    if (dictionary_.is_generic(subpath)) continue;
    auto tokens = tokenize_subpath(subpath, stopwords_);
    return std::clamp(best_topic(combined_embedding(tokens, model_)).second, 0.0, 1.0);
  }
  return 0.0;
}

std::pair<double, std::size_t> TopicClassifier::weight(const PageUrl& url, const Topic& topic) const {
  std::vector<std::string> tokens;
  for (const auto& subpath : url.subpaths) {
    auto t = tokenize_subpath(subpath, stopwords_);
    tokens.insert(tokens.end(), t.begin(), t.end());
  }
  if (tokens.empty()) return {0.0, 0};
  double c = cosine(combined_embedding(tokens, model_), topic_embedding(topic));
  return {c / static_cast<double>(tokens.size()), tokens.size()};
}

std::vector<RankedCandidate> TopicClassifier::rank(const std::vector<TopicAssignment>& candidates) const {
  std::vector<RankedCandidate> ranked;
  ranked.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto [w, n] = weight(c.url, c.topic);
    ranked.push_back({&c, w, n});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    std::size_t la = utf8_length(a.assignment->url.normalized);
    std::size_t lb = utf8_length(b.assignment->url.normalized);
    if (la != lb) return la < lb;
    return a.assignment->url.normalized < b.assignment->url.normalized;
  });
  return ranked;
}

const PageUrl& TopicClassifier::select_best(const std::vector<TopicAssignment>& candidates) const {
  if (candidates.empty()) throw Error(Errc::EmptyCandidates, "no candidates");
  const Topic& topic = candidates.front().topic;
  if (topic.is_other) throw Error(Errc::InvalidArgument, "best subpage requested for the Other topic");
  for (const auto& c : candidates) {
    if (c.topic.name != topic.name || c.site != candidates.front().site) {
      throw Error(Errc::InvalidArgument, "candidates must share topic and site");
    }
  }
  auto ranked = rank(candidates);
  const auto& keywords = dictionary_.keywords(topic);
  for (const auto& r : ranked) {
    const auto& subpaths = r.assignment->url.subpaths;
    if (subpaths.empty()) continue;
    std::string head = lowercase_ascii(subpaths.front());
    if (std::find(keywords.begin(), keywords.end(), head) != keywords.end()) return r.assignment->url;
  }
  return ranked.front().assignment->url;
}

std::vector<BestSubpages> best_subpages(const std::vector<TopicAssignment>& assignments,
                                        const TopicClassifier& classifier) {
  // site -> topic -> candidates, both ordered for deterministic output.
  std::map<std::string, std::map<std::string, std::vector<TopicAssignment>>> groups;
  for (const auto& a : assignments) {
    if (a.method == Method::Other || a.topic.is_other) continue;
    groups[a.site][a.topic.name].push_back(a);
  }
  std::vector<BestSubpages> out;
  for (auto& [site, by_topic] : groups) {
    BestSubpages best{site, {}};
    for (auto& [topic, candidates] : by_topic) best.selections.emplace(topic, classifier.select_best(candidates));
    out.push_back(std::move(best));
  }
  return out;
}

std::vector<BestSubpages> run_dibets(const std::vector<SiteInput>& sites, const TopicClassifier& classifier,
                                     const Thresholds& thresholds) {
  std::vector<BestSubpages> out;
  for (const auto& site : sites) {
    std::vector<TopicAssignment> assigned;
    for (const auto& u : filter_subpages(site.internal, thresholds)) {
      if (u.is_homepage()) continue;
      assigned.push_back(classifier.classify(u, site.homepage.domain));
    }
    auto per_site = best_subpages(assigned, classifier);
    out.push_back(per_site.empty() ? BestSubpages{site.homepage.domain, {}} : std::move(per_site.front()));
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> dictionary_assist(const std::vector<TopicAssignment>& assignments,
                                                                   const TopicalDictionary* dictionary) {
  std::map<std::string, std::size_t> counts;
  for (const auto& a : assignments) {
    if (a.method != Method::Other) continue;
    std::set<std::string> seen;
    for (const auto& s : a.url.subpaths) {
      std::string key = lowercase_ascii(s);
      if (dictionary && dictionary->is_generic(key)) continue;
      if (seen.insert(key).second) ++counts[key];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::string assignments_to_jsonl(const std::vector<TopicAssignment>& rows) {
  std::string out;
  for (const auto& a : rows) {
    nlohmann::ordered_json j;
    j["url"] = a.url.normalized;
    j["site"] = a.site;
    j["topic"] = a.topic.name;
    j["method"] = method_name(a.method);
    j["score"] = a.score;
    j["matched_subpath"] = a.matched_subpath;
    out += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  }
  return out;
}

std::vector<TopicAssignment> parse_assignments(std::string_view text, const TopicalDictionary* dictionary) {
  std::vector<TopicAssignment> out;
  for (auto [no, line] : io::lines(text)) {
    json j = json::parse(line, nullptr, false);
    try {
      if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("not a JSON object");
      TopicAssignment a;
      a.url = normalize(j.at("url").get<std::string>());
      a.site = j.at("site").get<std::string>();
      a.method = method_from_name(j.at("method").get<std::string>());
      a.topic.name = j.at("topic").get<std::string>();
      if (dictionary) {
        auto t = dictionary->find_topic(a.topic.name);
        if (!t) throw Error(Errc::UnknownTopic, a.topic.name);
        a.topic = *t;
      } else {
        a.topic.is_other = a.method == Method::Other;
      }
      a.score = j.value("score", 0.0);
      a.matched_subpath = j.value("matched_subpath", std::string{});
      out.push_back(std::move(a));
    } catch (const Error& e) {
      if (e.code() == Errc::UnknownTopic) throw;
      throw Error(Errc::MalformedRecord, "assignments line " + std::to_string(no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(Errc::MalformedRecord, "assignments line " + std::to_string(no) + ": " + e.what());
    }
  }
  return out;
}

std::string best_subpages_to_jsonl(const std::vector<BestSubpages>& rows) {
  std::string out;
  for (const auto& b : rows) {
    for (const auto& [topic, url] : b.selections) {
      nlohmann::ordered_json j;
      j["site"] = b.site;
      j["topic"] = topic;
      j["url"] = url.normalized;
      out += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
    }
  }
  return out;
}

std::vector<BestSubpages> parse_best_subpages(std::string_view text) {
  std::map<std::string, BestSubpages> by_site;
  for (auto [no, line] : io::lines(text)) {
    json j = json::parse(line, nullptr, false);
    try {
      if (j.is_discarded() || !j.is_object()) throw std::invalid_argument("not a JSON object");
      std::string site = j.at("site").get<std::string>();
      auto& b = by_site[site];
      b.site = site;
      b.selections.insert_or_assign(j.at("topic").get<std::string>(), normalize(j.at("url").get<std::string>()));
    } catch (const std::exception& e) {
      throw Error(Errc::MalformedRecord, "best-subpages line " + std::to_string(no) + ": " + e.what());
    }
  }
  std::vector<BestSubpages> out;
  for (auto& [_, b] : by_site) out.push_back(std::move(b));
  return out;
}

}  // namespace dibets
