#pragma once

#include <string>
#include <string_view>
#include <unordered_set>

namespace dibets {

// Public-suffix rules in the upstream list format: one rule per line, "//"
// comments, "*." wildcards and "!" exceptions. Unknown TLDs fall back to the
// implicit "*" rule.
class PublicSuffixList {
 public:
  PublicSuffixList() = default;

  static PublicSuffixList parse(std::string_view text);
  static PublicSuffixList load(const std::string& path);
  // Compiled-in snapshot covering common generic, Indian and country-code suffixes.
  static const PublicSuffixList& builtin();

  // eTLD+1 for a lowercase host. IP literals and single-label hosts are returned as-is.
  std::string registrable_domain(std::string_view host) const;
  std::string public_suffix(std::string_view host) const;

  std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }

 private:
  std::unordered_set<std::string> rules_;
  std::unordered_set<std::string> wildcards_;   // stored without the "*." prefix
  std::unordered_set<std::string> exceptions_;  // stored without the "!" prefix
};

}  // namespace dibets
