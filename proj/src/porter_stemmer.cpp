#include "audit/porter_stemmer.hpp"

#include <cstring>

namespace audit {
namespace {

// In-place stemmer over a char buffer. b[0..k] is the live word; j marks the
// end of the stem candidate after a suffix match.
struct Stemmer {
    char* b;
    int k;
    int j;

    bool cons(int i) const {
        switch (b[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u': return false;
            case 'y': return (i == 0) ? true : !cons(i - 1);
            default: return true;
        }
    }

    // Number of vowel-consonant sequences in b[0..j].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j) return n;
            if (!cons(i)) break;
            i++;
        }
        i++;
        while (true) {
            while (true) {
                if (i > j) return n;
                if (cons(i)) break;
                i++;
            }
            i++;
            n++;
            while (true) {
                if (i > j) return n;
                if (!cons(i)) break;
                i++;
            }
            i++;
        }
    }

    bool vowelinstem() const {
        for (int i = 0; i <= j; i++)
            if (!cons(i)) return true;
        return false;
    }

    bool doublec(int i) const {
        if (i < 1) return false;
        if (b[i] != b[i - 1]) return false;
        return cons(i);
    }

    // consonant - vowel - consonant ending at i, last consonant not w, x or y.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = b[i];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(const char* s, int length) {
        if (s[length - 1] != b[k]) return false;
        if (length > k + 1) return false;
        if (std::memcmp(b + k - length + 1, s, static_cast<size_t>(length)) != 0) return false;
        j = k - length;
        return true;
    }

    void setto(const char* s, int length) {
        std::memmove(b + j + 1, s, static_cast<size_t>(length));
        k = j + length;
    }

    void r(const char* s, int length) {
        if (m() > 0) setto(s, length);
    }

    void step1ab() {
        if (b[k] == 's') {
            if (ends("sses", 4)) k -= 2;
            else if (ends("ies", 3)) setto("i", 1);
            else if (b[k - 1] != 's') k--;
        }
        if (ends("eed", 3)) {
            if (m() > 0) k--;
        } else if ((ends("ed", 2) || ends("ing", 3)) && vowelinstem()) {
            k = j;
            if (ends("at", 2)) setto("ate", 3);
            else if (ends("bl", 2)) setto("ble", 3);
            else if (ends("iz", 2)) setto("ize", 3);
            else if (doublec(k)) {
                k--;
                char ch = b[k];
                if (ch == 'l' || ch == 's' || ch == 'z') k++;
            } else if (m() == 1 && cvc(k)) {
                setto("e", 1);
            }
        }
    }

    void step1c() {
        if (ends("y", 1) && vowelinstem()) b[k] = 'i';
    }

    void step2() {
        if (k < 1) return;
        switch (b[k - 1]) {
            case 'a':
                if (ends("ational", 7)) { r("ate", 3); break; }
                if (ends("tional", 6)) { r("tion", 4); break; }
                break;
            case 'c':
                if (ends("enci", 4)) { r("ence", 4); break; }
                if (ends("anci", 4)) { r("ance", 4); break; }
                break;
            case 'e':
                if (ends("izer", 4)) { r("ize", 3); break; }
                break;
            case 'l':
                if (ends("abli", 4)) { r("able", 4); break; }
                if (ends("alli", 4)) { r("al", 2); break; }
                if (ends("entli", 5)) { r("ent", 3); break; }
                if (ends("eli", 3)) { r("e", 1); break; }
                if (ends("ousli", 5)) { r("ous", 3); break; }
                break;
            case 'o':
                if (ends("ization", 7)) { r("ize", 3); break; }
                if (ends("ation", 5)) { r("ate", 3); break; }
                if (ends("ator", 4)) { r("ate", 3); break; }
                break;
            case 's':
                if (ends("alism", 5)) { r("al", 2); break; }
                if (ends("iveness", 7)) { r("ive", 3); break; }
                if (ends("fulness", 7)) { r("ful", 3); break; }
                if (ends("ousness", 7)) { r("ous", 3); break; }
                break;
            case 't':
                if (ends("aliti", 5)) { r("al", 2); break; }
                if (ends("iviti", 5)) { r("ive", 3); break; }
                if (ends("biliti", 6)) { r("ble", 3); break; }
                break;
        }
    }

    void step3() {
        switch (b[k]) {
            case 'e':
                if (ends("icate", 5)) { r("ic", 2); break; }
                if (ends("ative", 5)) { r("", 0); break; }
                if (ends("alize", 5)) { r("al", 2); break; }
                break;
            case 'i':
                if (ends("iciti", 5)) { r("ic", 2); break; }
                break;
            case 'l':
                if (ends("ical", 4)) { r("ic", 2); break; }
                if (ends("ful", 3)) { r("", 0); break; }
                break;
            case 's':
                if (ends("ness", 4)) { r("", 0); break; }
                break;
        }
    }

    void step4() {
        if (k < 1) return;
        switch (b[k - 1]) {
            case 'a':
                if (ends("al", 2)) break;
                return;
            case 'c':
                if (ends("ance", 4)) break;
                if (ends("ence", 4)) break;
                return;
            case 'e':
                if (ends("er", 2)) break;
                return;
            case 'i':
                if (ends("ic", 2)) break;
                return;
            case 'l':
                if (ends("able", 4)) break;
                if (ends("ible", 4)) break;
                return;
            case 'n':
                if (ends("ant", 3)) break;
                if (ends("ement", 5)) break;
                if (ends("ment", 4)) break;
                if (ends("ent", 3)) break;
                return;
            case 'o':
                if (ends("ion", 3) && j >= 0 && (b[j] == 's' || b[j] == 't')) break;
                if (ends("ou", 2)) break;
                return;
            case 's':
                if (ends("ism", 3)) break;
                return;
            case 't':
                if (ends("ate", 3)) break;
                if (ends("iti", 3)) break;
                return;
            case 'u':
                if (ends("ous", 3)) break;
                return;
            case 'v':
                if (ends("ive", 3)) break;
                return;
            case 'z':
                if (ends("ize", 3)) break;
                return;
            default:
                return;
        }
        if (m() > 1) k = j;
    }

    void step5() {
        j = k;
        if (b[k] == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k - 1))) k--;
        }
        if (b[k] == 'l' && doublec(k) && m() > 1) k--;
    }
};

} // namespace

std::string porter_stem(std::string_view word) {
    if (word.size() <= 2) return std::string(word);
    std::string buf(word);
    Stemmer st{buf.data(), static_cast<int>(buf.size()) - 1, 0};
    st.step1ab();
    st.step1c();
    st.step2();
    st.step3();
    st.step4();
    st.step5();
    buf.resize(static_cast<size_t>(st.k) + 1);
    return buf;
}

} // namespace audit
