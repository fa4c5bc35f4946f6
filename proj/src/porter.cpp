#include "fame/porter.hpp"

#include <array>
#include <utility>

namespace fame::corpus {
namespace {

// Working buffer for one word. `end` marks the length of the current stem
// while a suffix is being tested.
class Stemmer {
 public:
  explicit Stemmer(std::string_view word) : b_(word) {}

  std::string run() {
    step1a();
    step1b();
    step1c();
    step2();
    step3();
    step4();
    step5a();
    step5b();
    return b_;
  }

 private:
  bool consonant(std::size_t i) const {
    switch (b_[i]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !consonant(i - 1);
      default:
        return true;
    }
  }

  // m in [C](VC)^m[V] over b_[0, len).
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(i)) ++i;
    while (i < len) {
      while (i < len && !consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i)
      if (!consonant(i)) return true;
    return false;
  }

  bool double_consonant(std::size_t len) const {
    return len >= 2 && b_[len - 1] == b_[len - 2] && consonant(len - 1);
  }

  // cvc where the final c is not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) return false;
    const char c = b_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends_with(std::string_view s) const {
    return b_.size() >= s.size() && std::string_view(b_).substr(b_.size() - s.size()) == s;
  }

  void replace_suffix(std::size_t suffix_len, std::string_view repl) {
    b_.resize(b_.size() - suffix_len);
    b_.append(repl);
  }

  using Rule = std::pair<std::string_view, std::string_view>;

  // Finds the longest matching suffix; applies it when the stem measure
  // exceeds min_measure. Shorter suffixes are never retried.
  template <std::size_t N>
  void longest_rule(const std::array<Rule, N>& rules, int min_measure) {
    const Rule* best = nullptr;
    for (const auto& r : rules)
      if (ends_with(r.first) && (best == nullptr || r.first.size() > best->first.size()))
        best = &r;
    if (best == nullptr) return;
    const std::size_t stem_len = b_.size() - best->first.size();
    if (measure(stem_len) > min_measure) replace_suffix(best->first.size(), best->second);
  }

  void step1a() {
    if (ends_with("sses")) {
      replace_suffix(4, "ss");
    } else if (ends_with("ies")) {
      replace_suffix(3, "i");
    } else if (ends_with("ss")) {
    } else if (ends_with("s")) {
      replace_suffix(1, "");
    }
  }

  void step1b() {
    bool cleanup = false;
    if (ends_with("eed")) {
      if (measure(b_.size() - 3) > 0) replace_suffix(3, "ee");
    } else if (ends_with("ed") && has_vowel(b_.size() - 2)) {
      replace_suffix(2, "");
      cleanup = true;
    } else if (ends_with("ing") && has_vowel(b_.size() - 3)) {
      replace_suffix(3, "");
      cleanup = true;
    }
    if (!cleanup) return;

    if (ends_with("at") || ends_with("bl") || ends_with("iz")) {
      b_.push_back('e');
    } else if (double_consonant(b_.size())) {
      const char c = b_.back();
      if (c != 'l' && c != 's' && c != 'z') b_.pop_back();
    } else if (measure(b_.size()) == 1 && cvc(b_.size())) {
      b_.push_back('e');
    }
  }

  void step1c() {
    if (ends_with("y") && has_vowel(b_.size() - 1)) b_.back() = 'i';
  }

  void step2() {
    static constexpr std::array<Rule, 20> rules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    }};
    longest_rule(rules, 0);
  }

  void step3() {
    static constexpr std::array<Rule, 7> rules{{
        {"icate", "ic"},
        {"ative", ""},
        {"alize", "al"},
        {"iciti", "ic"},
        {"ical", "ic"},
        {"ful", ""},
        {"ness", ""},
    }};
    longest_rule(rules, 0);
  }

  void step4() {
    static constexpr std::array<std::string_view, 19> suffixes{
        "al",   "ance", "ence", "er",  "ic", "able", "ible", "ant", "ement", "ment",
        "ent",  "ion",  "ou",   "ism", "ate", "iti", "ous",  "ive", "ize"};
    std::string_view best;
    for (auto s : suffixes)
      if (ends_with(s) && s.size() > best.size()) best = s;
    if (best.empty()) return;
    const std::size_t stem_len = b_.size() - best.size();
    if (measure(stem_len) <= 1) return;
    if (best == "ion") {
      if (stem_len == 0 || (b_[stem_len - 1] != 's' && b_[stem_len - 1] != 't')) return;
    }
    b_.resize(stem_len);
  }

  void step5a() {
    if (!ends_with("e")) return;
    const std::size_t stem_len = b_.size() - 1;
    const int m = measure(stem_len);
    if (m > 1 || (m == 1 && !cvc(stem_len))) b_.pop_back();
  }

  void step5b() {
    if (measure(b_.size()) > 1 && double_consonant(b_.size()) && b_.back() == 'l') b_.pop_back();
  }

  std::string b_;
};

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.empty()) return {};
  return Stemmer(word).run();
}

}  // namespace fame::corpus
