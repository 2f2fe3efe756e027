#include "dibets/dictionary.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "dibets/error.hpp"

namespace dibets {
namespace {

std::string lowercase_ascii(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Lowercase ASCII alphanumerics and hyphens; non-ASCII bytes pass through so
// that non-Latin keywords can be listed verbatim.
bool valid_keyword(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

}  // namespace

TopicalDictionary TopicalDictionary::parse(std::string_view document) {
  using json = nlohmann::json;
  json j = json::parse(document, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::MalformedDocument, "dictionary is not a JSON object");
  if (!j.contains("topics") || !j["topics"].is_object()) {
    throw Error(Errc::MalformedDocument, "dictionary needs a \"topics\" object");
  }

  TopicalDictionary d;
  d.other_name_ = lowercase_ascii(j.value("other_name", std::string("other")));
  if (d.other_name_.empty()) throw Error(Errc::MalformedDocument, "other_name is empty");

  for (const auto& [raw_name, list] : j["topics"].items()) {
    std::string name = lowercase_ascii(raw_name);
    if (name.empty()) throw Error(Errc::MalformedDocument, "empty topic name");
    if (!list.is_array()) throw Error(Errc::MalformedDocument, "keywords of '" + name + "' are not a list");
    if (d.keywords_.count(name)) throw Error(Errc::MalformedDocument, "topic '" + name + "' listed twice");
    if (name == d.other_name_) {
      if (!list.empty()) throw Error(Errc::MalformedDocument, "the Other topic must have no keywords");
      continue;
    }
    std::vector<std::string> kws;
    for (const auto& item : list) {
      if (!item.is_string()) throw Error(Errc::MalformedDocument, "non-string keyword under '" + name + "'");
      std::string kw = lowercase_ascii(item.get<std::string>());
      if (!valid_keyword(kw)) throw Error(Errc::MalformedDocument, "invalid keyword '" + kw + "' under '" + name + "'");
      auto [it, inserted] = d.keyword_topic_.emplace(kw, name);
      if (!inserted) {
        if (it->second == name) continue;  // repeated within a topic: harmless
        throw Error(Errc::DuplicateKeyword, "'" + kw + "' appears under '" + it->second + "' and '" + name + "'");
      }
      kws.push_back(std::move(kw));
    }
    d.keywords_.emplace(name, std::move(kws));
  }
  if (d.keywords_.empty()) throw Error(Errc::EmptyTopicSet, "dictionary defines no topics");
  d.keywords_.emplace(d.other_name_, std::vector<std::string>{});
  for (const auto& [name, _] : d.keywords_) d.topics_.push_back({name, name == d.other_name_});

  if (j.contains("generic_subpaths")) {
    if (!j["generic_subpaths"].is_array()) throw Error(Errc::MalformedDocument, "generic_subpaths must be a list");
    for (const auto& g : j["generic_subpaths"]) {
      if (!g.is_string()) throw Error(Errc::MalformedDocument, "non-string generic subpath");
      d.generic_.push_back(lowercase_ascii(g.get<std::string>()));
    }
  }
  return d;
}

const Topic& TopicalDictionary::other() const {
  return *std::find_if(topics_.begin(), topics_.end(), [](const Topic& t) { return t.is_other; });
}

const std::vector<std::string>& TopicalDictionary::keywords(std::string_view topic_name) const {
  auto it = keywords_.find(topic_name);
  if (it == keywords_.end()) throw Error(Errc::UnknownTopic, std::string(topic_name));
  return it->second;
}

const std::vector<std::string>& TopicalDictionary::keywords(const Topic& topic) const {
  return keywords(topic.name);
}

std::optional<Topic> TopicalDictionary::topic_of_keyword(std::string_view keyword) const {
  auto it = keyword_topic_.find(std::string(keyword));
  if (it == keyword_topic_.end()) return std::nullopt;
  return Topic{it->second, false};
}

std::optional<Topic> TopicalDictionary::find_topic(std::string_view name) const {
  for (const auto& t : topics_) {
    if (t.name == name) return t;
  }
  return std::nullopt;
}

bool TopicalDictionary::is_generic(std::string_view subpath) const {
  std::string s = lowercase_ascii(std::string(subpath));
  return std::find(generic_.begin(), generic_.end(), s) != generic_.end();
}

}  // namespace dibets
