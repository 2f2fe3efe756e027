#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dibets {

struct Topic {
  std::string name;
  bool is_other = false;

  bool operator==(const Topic&) const = default;
  auto operator<=>(const Topic&) const = default;
};

/// Topic -> keyword lists plus the generic subpaths skipped during
/// classification. Topics are kept in name order; exactly one is Other and
/// it has no keywords.
class TopicalDictionary {
 public:
  /// Parses {"topics": {name: [keywords]}, "generic_subpaths": [...],
  /// "other_name": "..."}. Throws DuplicateKeyword, EmptyTopicSet or
  /// MalformedDocument.
  static TopicalDictionary parse(std::string_view document);

  const std::vector<Topic>& topics() const { return topics_; }
  const Topic& other() const;
  const std::vector<std::string>& keywords(const Topic& topic) const;
  const std::vector<std::string>& keywords(std::string_view topic_name) const;
  std::optional<Topic> topic_of_keyword(std::string_view keyword) const;
  std::optional<Topic> find_topic(std::string_view name) const;
  bool is_generic(std::string_view subpath) const;
  const std::vector<std::string>& generic_subpaths() const { return generic_; }
  std::size_t keyword_count() const { return keyword_topic_.size(); }

 private:
  std::vector<Topic> topics_;
  std::map<std::string, std::vector<std::string>, std::less<>> keywords_;
  std::unordered_map<std::string, std::string> keyword_topic_;
  std::vector<std::string> generic_;
  std::string other_name_;
};

}  // namespace dibets
