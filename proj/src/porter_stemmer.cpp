// Porter's suffix-stripping algorithm as published in 1980 (Program 14(3)),
// without the later "logi"/"bli" departures of the reference C release.
//
// Rule table, applied in order; within a step the first rule whose suffix
// matches is the only one considered, and m() is the measure of the stem
// that remains once the suffix is removed.
//
//   1a  sses->ss  ies->i  ss->ss  s->
//   1b  (m>0) eed->ee   (*v*) ed->   (*v*) ing->
//       after ed/ing: at->ate bl->ble iz->ize; double consonant (not l,s,z)
//       -> single; (m=1 and *o) -> +e
//   1c  (*v*) y->i
//   2   (m>0) ational->ate tional->tion enci->ence anci->ance izer->ize
//       abli->able alli->al entli->ent eli->e ousli->ous ization->ize
//       ation->ate ator->ate alism->al iveness->ive fulness->ful
//       ousness->ous aliti->al iviti->ive biliti->ble
//   3   (m>0) icate->ic ative-> alize->al iciti->ic ical->ic ful-> ness->
//   4   (m>1) al ance ence er ic able ible ant ement ment ent
//       (*s or *t)ion ou ism ate iti ous ive ize -> removed
//   5a  (m>1) e->   (m=1 and not *o) e->
//   5b  (m>1 and *d and *l) -> single letter

#include "fixtime/textproc.hpp"

#include <array>
#include <utility>

namespace fixtime::text {

namespace {

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

class PorterStemmer {
  public:
    explicit PorterStemmer(std::string_view word) : b_(word) {}

    std::string run() && {
        if (b_.size() <= 2) {
            return std::move(b_);
        }
        step1a();
        step1b();
        step1c();
        step2();
        step3();
        step4();
        step5();
        return std::move(b_);
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

    /// Number of VC sequences in b_[0, len).
    int measure(std::size_t len) const {
        int n = 0;
        std::size_t i = 0;
        while (i < len && consonant(i)) {
            ++i;
        }
        while (i < len) {
            while (i < len && !consonant(i)) {
                ++i;
            }
            if (i >= len) {
                break;
            }
            while (i < len && consonant(i)) {
                ++i;
            }
            ++n;
        }
        return n;
    }

    bool has_vowel(std::size_t len) const {
        for (std::size_t i = 0; i < len; ++i) {
            if (!consonant(i)) {
                return true;
            }
        }
        return false;
    }

    /// b_[0, len) ends in a double consonant.
    bool double_consonant(std::size_t len) const {
        return len >= 2 && b_[len - 1] == b_[len - 2] && consonant(len - 1);
    }

    /// b_[0, len) ends consonant-vowel-consonant, the last not w, x or y.
    bool cvc(std::size_t len) const {
        if (len < 3 || !consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) {
            return false;
        }
        const char c = b_[len - 1];
        return c != 'w' && c != 'x' && c != 'y';
    }

    bool ends(std::string_view suffix) const {
        return b_.size() >= suffix.size() && std::string_view(b_).substr(b_.size() - suffix.size()) == suffix;
    }

    void replace_suffix(std::size_t suffix_len, std::string_view replacement) {
        b_.resize(b_.size() - suffix_len);
        b_.append(replacement);
    }

    template <std::size_t N>
    void apply_first(const std::array<Rule, N>& rules, int min_measure_exclusive) {
        for (const auto& rule : rules) {
            if (ends(rule.suffix)) {
                if (measure(b_.size() - rule.suffix.size()) > min_measure_exclusive) {
                    replace_suffix(rule.suffix.size(), rule.replacement);
                }
                return;
            }
        }
    }

    void step1a() {
        if (ends("sses")) {
            replace_suffix(4, "ss");
        } else if (ends("ies")) {
            replace_suffix(3, "i");
        } else if (ends("ss")) {
            // unchanged
        } else if (ends("s")) {
            replace_suffix(1, "");
        }
    }

    void step1b() {
        if (ends("eed")) {
            if (measure(b_.size() - 3) > 0) {
                replace_suffix(1, "");
            }
            return;
        }
        std::size_t cut = 0;
        if (ends("ed") && has_vowel(b_.size() - 2)) {
            cut = 2;
        } else if (ends("ing") && has_vowel(b_.size() - 3)) {
            cut = 3;
        }
        if (cut == 0) {
            return;
        }
        replace_suffix(cut, "");
        if (ends("at")) {
            replace_suffix(2, "ate");
        } else if (ends("bl")) {
            replace_suffix(2, "ble");
        } else if (ends("iz")) {
            replace_suffix(2, "ize");
        } else if (double_consonant(b_.size())) {
            const char c = b_.back();
            if (c != 'l' && c != 's' && c != 'z') {
                b_.pop_back();
            }
        } else if (measure(b_.size()) == 1 && cvc(b_.size())) {
            b_.push_back('e');
        }
    }

    void step1c() {
        if (ends("y") && has_vowel(b_.size() - 1)) {
            b_.back() = 'i';
        }
    }

    void step2() {
        static constexpr std::array<Rule, 20> rules{{
            {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},   {"izer", "ize"},
            {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},       {"ousli", "ous"},
            {"ization", "ize"}, {"ation", "ate"},   {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
            {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
        }};
        apply_first(rules, 0);
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
        apply_first(rules, 0);
    }

    void step4() {
        static constexpr std::array<std::string_view, 19> suffixes{
            "al",  "ance", "ence", "er", "ic",  "able", "ible", "ant", "ement", "ment",
            "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
        for (const auto s : suffixes) {
            if (!ends(s)) {
                continue;
            }
            const std::size_t stem_len = b_.size() - s.size();
            if (s == "ion" && (stem_len == 0 || (b_[stem_len - 1] != 's' && b_[stem_len - 1] != 't'))) {
                continue;
            }
            if (measure(stem_len) > 1) {
                b_.resize(stem_len);
            }
            return;
        }
    }

    void step5() {
        if (ends("e")) {
            const std::size_t stem_len = b_.size() - 1;
            const int m = measure(stem_len);
            if (m > 1 || (m == 1 && !cvc(stem_len))) {
                b_.pop_back();
            }
        }
        if (ends("l") && double_consonant(b_.size()) && measure(b_.size()) > 1) {
            b_.pop_back();
        }
    }

    std::string b_;
};

}  // namespace

std::string porter_stem(std::string_view word) { return PorterStemmer(word).run(); }

std::string stem(std::string_view word) {
    std::string current(word);
    for (int i = 0; i < 16; ++i) {
        std::string next = porter_stem(current);
        if (next == current) {
            break;
        }
        current = std::move(next);
    }
    return current;
}

}  // namespace fixtime::text
