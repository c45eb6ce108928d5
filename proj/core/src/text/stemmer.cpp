#include "reconkit/text/stemmer.hpp"

#include <array>
#include <string_view>

namespace reconkit::text {

namespace {

struct Rule {
    std::string_view suffix;
    std::string_view replacement;
};

// Step 2 and step 3 rules, grouped by the letter that selects the group.
// Within a group the first matching suffix decides; it is replaced only when
// the measure of the remaining stem is positive.
constexpr std::array kStep2Rules{
    Rule{"ational", "ate"}, Rule{"tional", "tion"}, Rule{"enci", "ence"}, Rule{"anci", "ance"},
    Rule{"izer", "ize"},    Rule{"bli", "ble"},     Rule{"alli", "al"},    Rule{"entli", "ent"},
    Rule{"eli", "e"},       Rule{"ousli", "ous"},   Rule{"ization", "ize"}, Rule{"ation", "ate"},
    Rule{"ator", "ate"},    Rule{"alism", "al"},    Rule{"iveness", "ive"}, Rule{"fulness", "ful"},
    Rule{"ousness", "ous"}, Rule{"aliti", "al"},    Rule{"iviti", "ive"},  Rule{"biliti", "ble"},
    Rule{"logi", "log"},
};

constexpr std::array kStep3Rules{
    Rule{"icate", "ic"}, Rule{"ative", ""}, Rule{"alize", "al"}, Rule{"iciti", "ic"},
    Rule{"ical", "ic"},  Rule{"ful", ""},   Rule{"ness", ""},
};

// Step 4 suffixes are deleted when the measure exceeds one. "ion" additionally
// requires a preceding 's' or 't'.
constexpr std::array<std::string_view, 19> kStep4Suffixes{
    "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
    "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize",
};

class Stemmer {
public:
    explicit Stemmer(std::string word) : b_(std::move(word)), k_(static_cast<int>(b_.size()) - 1) {}

    std::string run() {
        if (k_ <= 1) return b_;
        step1ab();
        if (k_ > 0) {
            step1c();
            step2();
            step3();
            step4();
            step5();
        }
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

private:
    bool cons(int i) const {
        switch (b_[static_cast<std::size_t>(i)]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return i == 0 ? true : !cons(i - 1);
            default: return true;
        }
    }

    // Number of VC sequences in b[0..j].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool double_c(int j) const {
        if (j < 1) return false;
        if (b_[static_cast<std::size_t>(j)] != b_[static_cast<std::size_t>(j - 1)]) return false;
        return cons(j);
    }

    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = b_[static_cast<std::size_t>(i)];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        const int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (std::string_view(b_).substr(static_cast<std::size_t>(k_ + 1 - len), s.size()) != s)
            return false;
        j_ = k_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
    }

    void step1ab() {
        if (b_[static_cast<std::size_t>(k_)] == 's') {
            if (ends("sses")) k_ -= 2;
            else if (ends("ies")) set_to("i");
            else if (b_[static_cast<std::size_t>(k_ - 1)] != 's') --k_;
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) set_to("ate");
            else if (ends("bl")) set_to("ble");
            else if (ends("iz")) set_to("ize");
            else if (double_c(k_)) {
                --k_;
                const char ch = b_[static_cast<std::size_t>(k_)];
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1 && cvc(k_)) {
                set_to("e");
            }
        }
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }

    template <std::size_t N>
    void apply_first(const std::array<Rule, N>& rules) {
        for (const auto& rule : rules) {
            if (ends(rule.suffix)) {
                if (m() > 0) set_to(rule.replacement);
                b_.resize(static_cast<std::size_t>(k_ + 1));
                return;
            }
        }
    }

    void step2() { apply_first(kStep2Rules); }
    void step3() { apply_first(kStep3Rules); }

    void step4() {
        for (std::string_view suffix : kStep4Suffixes) {
            if (!ends(suffix)) continue;
            if (suffix == "ion") {
                const char prev = j_ >= 0 ? b_[static_cast<std::size_t>(j_)] : '\0';
                if (prev != 's' && prev != 't') continue;
            }
            if (m() > 1) {
                k_ = j_;
                b_.resize(static_cast<std::size_t>(k_ + 1));
            }
            return;
        }
    }

    void step5() {
        j_ = k_;
        if (b_[static_cast<std::size_t>(k_)] == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (b_[static_cast<std::size_t>(k_)] == 'l' && double_c(k_) && m() > 1) --k_;
        b_.resize(static_cast<std::size_t>(k_ + 1));
    }

    std::string b_;
    int k_;
    int j_ = 0;
};

}  // namespace

std::string porter_stem(std::string_view word) {
    for (char c : word)
        if (c < 'a' || c > 'z') return std::string(word);
    return Stemmer(std::string(word)).run();
}

}  // namespace reconkit::text
