#pragma once

#include <string>
#include <string_view>

namespace trirank {
namespace detail {

/// Porter (1980) suffix stripper, following the widely distributed reference
/// implementation (including its documented departures from the paper, e.g.
/// -bli for -abli in step 2 and leaving 1- and 2-letter words untouched).
/// Operates on lowercase ASCII; callers lowercase first.
/// Indices are signed: j may legitimately reach -1 when a suffix spans the
/// whole word.
class porter_state {
  public:
    explicit porter_state(std::string word)
        : b_(std::move(word)), k_(static_cast<int>(b_.size()) - 1) {}

    std::string stem() {
        if (b_.size() <= 2) return b_;
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        return b_.substr(0, static_cast<std::size_t>(k_ + 1));
    }

  private:
    std::string b_;
    int k_ = -1;  // last index of the current stem
    int j_ = 0;   // end of the region measured by m()

    char at(int i) const { return b_[static_cast<std::size_t>(i)]; }

    bool cons(int i) const {
        switch (at(i)) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 ? true : !cons(i - 1);
            default:
                return true;
        }
    }

    // Measure of consonant-vowel sequences in b[0..j].
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

    bool double_cons(int i) const {
        if (i < 1) return false;
        if (at(i) != at(i - 1)) return false;
        return cons(i);
    }

    // consonant-vowel-consonant at i-2..i, final consonant not w, x or y.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = at(i);
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        int len = static_cast<int>(s.size());
        if (len > k_ + 1) return false;
        if (b_.compare(static_cast<std::size_t>(k_ + 1 - len), s.size(), s) != 0)
            return false;
        j_ = k_ - len;
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(static_cast<std::size_t>(j_ + 1),
                   static_cast<std::size_t>(k_ - j_), s);
        k_ = j_ + static_cast<int>(s.size());
    }

    void replace_if_m_positive(std::string_view s) {
        if (m() > 0) set_to(s);
    }

    void step1ab() {
        if (at(k_) == 's') {
            if (ends("sses")) k_ -= 2;
            else if (ends("ies")) set_to("i");
            else if (at(k_ - 1) != 's') --k_;
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) set_to("ate");
            else if (ends("bl")) set_to("ble");
            else if (ends("iz")) set_to("ize");
            else if (double_cons(k_)) {
                --k_;
                char ch = at(k_);
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1) {
                j_ = k_;
                if (cvc(k_)) set_to("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[static_cast<std::size_t>(k_)] = 'i';
    }

    void step2() {
        if (k_ < 1) return;
        switch (at(k_ - 1)) {
            case 'a':
                if (ends("ational")) { replace_if_m_positive("ate"); break; }
                if (ends("tional")) { replace_if_m_positive("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { replace_if_m_positive("ence"); break; }
                if (ends("anci")) { replace_if_m_positive("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { replace_if_m_positive("ize"); break; }
                break;
            case 'l':
                if (ends("bli")) { replace_if_m_positive("ble"); break; }
                if (ends("alli")) { replace_if_m_positive("al"); break; }
                if (ends("entli")) { replace_if_m_positive("ent"); break; }
                if (ends("eli")) { replace_if_m_positive("e"); break; }
                if (ends("ousli")) { replace_if_m_positive("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { replace_if_m_positive("ize"); break; }
                if (ends("ation")) { replace_if_m_positive("ate"); break; }
                if (ends("ator")) { replace_if_m_positive("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { replace_if_m_positive("al"); break; }
                if (ends("iveness")) { replace_if_m_positive("ive"); break; }
                if (ends("fulness")) { replace_if_m_positive("ful"); break; }
                if (ends("ousness")) { replace_if_m_positive("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { replace_if_m_positive("al"); break; }
                if (ends("iviti")) { replace_if_m_positive("ive"); break; }
                if (ends("biliti")) { replace_if_m_positive("ble"); break; }
                break;
            case 'g':
                if (ends("logi")) { replace_if_m_positive("log"); break; }
                break;
            default:
                break;
        }
    }

    void step3() {
        switch (at(k_)) {
            case 'e':
                if (ends("icate")) { replace_if_m_positive("ic"); break; }
                if (ends("ative")) { replace_if_m_positive(""); break; }
                if (ends("alize")) { replace_if_m_positive("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { replace_if_m_positive("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { replace_if_m_positive("ic"); break; }
                if (ends("ful")) { replace_if_m_positive(""); break; }
                break;
            case 's':
                if (ends("ness")) { replace_if_m_positive(""); break; }
                break;
            default:
                break;
        }
    }

    void step4() {
        if (k_ < 1) return;
        switch (at(k_ - 1)) {
            case 'a':
                if (ends("al")) break;
                return;
            case 'c':
                if (ends("ance")) break;
                if (ends("ence")) break;
                return;
            case 'e':
                if (ends("er")) break;
                return;
            case 'i':
                if (ends("ic")) break;
                return;
            case 'l':
                if (ends("able")) break;
                if (ends("ible")) break;
                return;
            case 'n':
                if (ends("ant")) break;
                if (ends("ement")) break;
                if (ends("ment")) break;
                if (ends("ent")) break;
                return;
            case 'o':
                if (ends("ion") && j_ >= 0 && (at(j_) == 's' || at(j_) == 't')) break;
                if (ends("ou")) break;
                return;
            case 's':
                if (ends("ism")) break;
                return;
            case 't':
                if (ends("ate")) break;
                if (ends("iti")) break;
                return;
            case 'u':
                if (ends("ous")) break;
                return;
            case 'v':
                if (ends("ive")) break;
                return;
            case 'z':
                if (ends("ize")) break;
                return;
            default:
                return;
        }
        if (m() > 1) k_ = j_;
    }

    void step5() {
        j_ = k_;
        if (at(k_) == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (at(k_) == 'l' && double_cons(k_) && m() > 1) --k_;
    }
};

}  // namespace detail

/// Stem one lowercase token with the Porter algorithm.
inline std::string porter_stem(std::string word) {
    return detail::porter_state(std::move(word)).stem();
}

}  // namespace trirank
