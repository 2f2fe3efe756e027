#include "dibets/stemmer.hpp"

#include <algorithm>

namespace dibets {
namespace {

class Stemmer {
 public:
  explicit Stemmer(std::string w) : b_(std::move(w)) {}

  std::string run() {
    if (b_.size() <= 2) return b_;
    step1ab();
    if (b_.size() > 1) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_;
  }

 private:
  // Consonant test at position i, with 'y' a consonant only after a vowel.
  bool cons(std::size_t i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u': return false;
      case 'y': return i == 0 ? true : !cons(i - 1);
      default: return true;
    }
  }

  // Number of VC sequences in b_[0, j_].
  int measure() const {
    int n = 0;
    std::size_t i = 0;
    const std::size_t end = j_ + 1;
    while (true) {
      if (i >= end) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i >= end) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i >= end) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (std::size_t i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_cons(std::size_t j) const { return j >= 1 && b_[j] == b_[j - 1] && cons(j); }

  // cvc at i where the final c is not w, x or y.
  bool cvc(std::size_t i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    char ch = b_[i];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  // Sets j_ to the index before the suffix when b_ ends with s.
  bool ends(std::string_view s) {
    if (s.size() > b_.size() || std::string_view(b_).substr(b_.size() - s.size()) != s) return false;
    j_ = b_.size() - s.size() - 1;  // may wrap for whole-word suffixes; callers guard with measure()
    if (s.size() == b_.size()) j_ = static_cast<std::size_t>(-1);
    return true;
  }

  void set_to(std::string_view s) { b_ = b_.substr(0, j_ + 1) + std::string(s); }

  void replace_if_measured(std::string_view s) {
    if (j_ != static_cast<std::size_t>(-1) && measure() > 0) set_to(s);
  }

  void step1ab() {
    if (b_.back() == 's') {
      if (ends("sses")) b_.resize(b_.size() - 2);
      else if (ends("ies")) set_to("i");
      else if (b_.size() >= 2 && b_[b_.size() - 2] != 's') b_.pop_back();
    }
    if (ends("eed")) {
      if (j_ != static_cast<std::size_t>(-1) && measure() > 0) b_.pop_back();
    } else if ((ends("ed") || ends("ing")) && j_ != static_cast<std::size_t>(-1) && vowel_in_stem()) {
      b_.resize(j_ + 1);
      std::size_t k = b_.size() - 1;
      if (ends("at")) set_to("ate");
      else if (ends("bl")) set_to("ble");
      else if (ends("iz")) set_to("ize");
      else if (double_cons(k)) {
        char ch = b_[k];
        if (ch != 'l' && ch != 's' && ch != 'z') b_.pop_back();
      } else {
        j_ = k;
        if (measure() == 1 && cvc(k)) b_ += 'e';
      }
    }
  }

  void step1c() {
    if (ends("y") && j_ != static_cast<std::size_t>(-1) && vowel_in_stem()) b_.back() = 'i';
  }

  void step2() {
    static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"}, {"izer", "ize"},
        {"bli", "ble"},     {"alli", "al"},     {"entli", "ent"}, {"eli", "e"},     {"ousli", "ous"},
        {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},  {"alism", "al"},  {"iveness", "ive"},
        {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},  {"iviti", "ive"}, {"biliti", "ble"},
        {"logi", "log"}};
    for (const auto& [suffix, repl] : kRules) {
      if (ends(suffix)) {
        replace_if_measured(repl);
        return;
      }
    }
  }

  void step3() {
    static constexpr std::pair<std::string_view, std::string_view> kRules[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"}, {"ical", "ic"}, {"ful", ""}, {"ness", ""}};
    for (const auto& [suffix, repl] : kRules) {
      if (ends(suffix)) {
        replace_if_measured(repl);
        return;
      }
    }
  }

  void step4() {
    static constexpr std::string_view kSuffixes[] = {"al",  "ance", "ence", "er",  "ic",  "able", "ible",
                                                     "ant", "ement", "ment", "ent", "ion", "ou",   "ism",
                                                     "ate", "iti",  "ous",  "ive", "ize"};
    for (std::string_view s : kSuffixes) {
      if (!ends(s)) continue;
      if (j_ == static_cast<std::size_t>(-1)) return;
      if (s == "ion" && !(b_[j_] == 's' || b_[j_] == 't')) return;
      if (measure() > 1) b_.resize(j_ + 1);
      return;
    }
  }

  void step5() {
    j_ = b_.size() - 1;
    if (b_.back() == 'e') {
      j_ = b_.size() - 2;
      int m = measure();
      if (m > 1 || (m == 1 && !cvc(b_.size() - 2))) b_.pop_back();
    }
    j_ = b_.size() - 1;
    if (b_.back() == 'l' && double_cons(b_.size() - 1) && measure() > 1) b_.pop_back();
  }

  std::string b_;
  std::size_t j_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.size() <= 2 || !std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
    return std::string(word);
  }
  return Stemmer(std::string(word)).run();
}

}  // namespace dibets
