#include "doctest.h"

#include "kleinian/errors.hpp"
#include "kleinian/words.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>

using namespace kleinian;

namespace {

Word random_word(std::mt19937_64& rng, int n, int max_len) {
    std::uniform_int_distribution<int> fac(1, n), bit(0, 1), len(0, max_len);
    Word w;
    int l = len(rng);
    for (int i = 0; i < l; ++i) w.push_back(Letter{fac(rng), bit(rng), bit(rng) ? 1 : -1});
    return w;
}

// Oracle for the group element: the tuple of per-factor freely reduced
// words, computed with an explicit stack of strings.
std::vector<std::string> element_key(const Word& w, int n) {
    std::vector<std::vector<std::string>> stacks(static_cast<size_t>(n));
    for (const Letter& l : w) {
        auto& st = stacks[static_cast<size_t>(l.factor - 1)];
        std::string tok = format_letter(l), inv = format_letter(l.inverse());
        if (!st.empty() && st.back() == inv)
            st.pop_back();
        else
            st.push_back(tok);
    }
    std::vector<std::string> key;
    for (auto& st : stacks) {
        std::string s;
        for (auto& t : st) s += t + " ";
        key.push_back(s);
    }
    return key;
}

std::vector<Plane> all_planes(int n) {
    std::vector<Plane> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        Plane b;
        for (int j = n - 1; j >= 0; --j) b += ((mask >> j) & 1) ? '1' : '0';
        out.push_back(b);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Brute-force syllabification: extend each run while some plane holds all of
// its letters, and take the lexicographically smallest such plane.
Itinerary brute_itinerary(const Word& w, int n) {
    auto planes = all_planes(n);
    auto fitting = [&](size_t from, size_t to) {
        for (const Plane& b : planes) {
            bool ok = true;
            for (size_t i = from; i < to && ok; ++i)
                ok = b[static_cast<size_t>(w[i].factor - 1)] - '0' == w[i].gen;
            if (ok) return b;
        }
        return Plane();
    };
    Itinerary out;
    size_t i = 0;
    while (i < w.size()) {
        size_t j = i + 1;
        while (j < w.size() && !fitting(i, j + 1).empty()) ++j;
        out.push_back(Syllable{fitting(i, j), Word(w.begin() + static_cast<long>(i), w.begin() + static_cast<long>(j))});
        i = j;
    }
    return out;
}

// Minimum number of single-plane runs, by dynamic programming.
size_t min_syllables(const Word& w, int n) {
    auto planes = all_planes(n);
    auto fits = [&](size_t from, size_t to) {
        for (const Plane& b : planes) {
            bool ok = true;
            for (size_t i = from; i < to && ok; ++i)
                ok = b[static_cast<size_t>(w[i].factor - 1)] - '0' == w[i].gen;
            if (ok) return true;
        }
        return false;
    };
    std::vector<size_t> best(w.size() + 1, SIZE_MAX);
    best[0] = 0;
    for (size_t j = 1; j <= w.size(); ++j)
        for (size_t i = 0; i < j; ++i)
            if (best[i] != SIZE_MAX && fits(i, j)) best[j] = std::min(best[j], best[i] + 1);
    return best[w.size()];
}

}  // namespace

TEST_CASE("literal syntax round trip and errors") {
    Word w = parse_word("a1+ a1- b2+");
    REQUIRE(w.size() == 3);
    CHECK(w[0] == Letter{1, 0, 1});
    CHECK(w[1] == Letter{1, 0, -1});
    CHECK(w[2] == Letter{2, 1, 1});
    CHECK(format_word(w) == "a1+ a1- b2+");
    CHECK(parse_word("  a12-\tb3+\n").size() == 2);
    CHECK(parse_word("a12-")[0].factor == 12);
    CHECK(parse_word("").empty());
    for (const char* bad : {"c1+", "a1", "a+", "ax+", "a0+", "a1*", "a-1+"})
        CHECK_THROWS_AS(parse_word(bad), Error);
    std::mt19937_64 rng(41);
    for (int k = 0; k < 200; ++k) {
        Word r = random_word(rng, 3, 10);
        CHECK(parse_word(format_word(r)) == r);
    }
}

TEST_CASE("free reduction examples") {
    CHECK(reduce(parse_word("a1+ a1-")).empty());
    CHECK(reduce(parse_word("a1+ b2+ a1+")) == parse_word("a1+ a1+ b2+"));
    CHECK(free_reduce(parse_word("a1+ b2+ b2- a1-")).empty());
    CHECK(free_reduce(parse_word("a1+ b2+ a1- b2-")) == parse_word("a1+ b2+ a1- b2-"));
    CHECK(reduce(parse_word("a1+ b2+ a1- b2-")).empty());
    CHECK(inverse(parse_word("a1+ b2-")) == parse_word("b2+ a1-"));
}

TEST_CASE("normal form agrees with the per-factor stack oracle") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 2000; ++k) {
        int n = 1 + k % 3;
        Word w = random_word(rng, n, 14);
        Word r = reduce(w);
        CHECK(reduce(r) == r);
        CHECK(r.size() <= w.size());
        CHECK(is_freely_reduced(r));
        CHECK(element_key(r, n) == element_key(w, n));
        // Normal form groups letters by nondecreasing factor.
        CHECK(std::is_sorted(r.begin(), r.end(), [](const Letter& a, const Letter& b) { return a.factor < b.factor; }));
        Word f = free_reduce(w);
        CHECK(is_freely_reduced(f));
        CHECK(free_reduce(f) == f);
        CHECK(reduce(f) == r);
    }
}

TEST_CASE("two words are equal in the group exactly when their normal forms agree") {
    // Exhaustive over all words of length <= 3 in n = 2.
    std::vector<Letter> letters;
    for (int j = 1; j <= 2; ++j)
        for (int s = 0; s <= 1; ++s)
            for (int e : {1, -1}) letters.push_back(Letter{j, s, e});
    std::vector<Word> words{Word{}};
    for (int len = 1; len <= 3; ++len) {
        std::vector<Word> next;
        for (const Word& w : words)
            if (static_cast<int>(w.size()) == len - 1)
                for (const Letter& l : letters) {
                    Word x = w;
                    x.push_back(l);
                    next.push_back(x);
                }
        words.insert(words.end(), next.begin(), next.end());
    }
    CHECK(words.size() == 1 + 8 + 64 + 512);
    std::map<std::vector<std::string>, Word> seen;
    for (const Word& w : words) {
        auto key = element_key(w, 2);
        auto [it, inserted] = seen.emplace(key, reduce(w));
        if (!inserted) CHECK(it->second == reduce(w));
    }
    std::set<Word> forms;
    for (auto& [k, v] : seen) forms.insert(v);
    CHECK(forms.size() == seen.size());
}

TEST_CASE("itinerary examples") {
    Itinerary one = word_to_itinerary(parse_word("a1+ b2+"), 2);
    REQUIRE(one.size() == 1);
    CHECK(one[0].plane == "01");
    Itinerary two = word_to_itinerary(parse_word("a1+ b1+"), 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].plane == "00");
    CHECK(two[1].plane == "10");
    Itinerary single = word_to_itinerary(parse_word("a1+"), 2);
    REQUIRE(single.size() == 1);
    CHECK(single[0].plane == "00");
    CHECK(format_itinerary(two) == "00:[a1+] | 10:[b1+]");
    CHECK_THROWS_AS(word_to_itinerary(Word{}, 2), Error);
    try {
        word_to_itinerary(Word{}, 2);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyWord);
    }
    CHECK_THROWS_AS(word_to_itinerary(parse_word("a3+"), 2), Error);
}

TEST_CASE("itinerary matches the brute-force syllabifier and is minimal") {
    std::mt19937_64 rng(43);
    for (int k = 0; k < 2000; ++k) {
        int n = 1 + k % 3;
        Word w = random_word(rng, n, 16);
        if (w.empty()) continue;
        Itinerary it = word_to_itinerary(w, n);
        CHECK(it == brute_itinerary(w, n));
        CHECK(it.size() == min_syllables(w, n));
        CHECK(concatenate(it) == w);
        for (size_t i = 0; i < it.size(); ++i) {
            CHECK(!it[i].subword.empty());
            for (const Letter& l : it[i].subword) CHECK(letter_fits(l, it[i].plane));
            if (i) CHECK(it[i].plane != it[i - 1].plane);
        }
        // Reading the inverse word needs the same number of syllables.
        Itinerary back = word_to_itinerary(inverse(w), n);
        CHECK(back.size() == it.size());
        CHECK(concatenate(back) == inverse(w));
    }
}

TEST_CASE("factor projection and validation") {
    Word w = parse_word("a1+ b2- a1- b1+");
    auto parts = factor_projection(w, 2);
    CHECK(parts[0] == parse_word("a1+ a1- b1+"));
    CHECK(parts[1] == parse_word("b2-"));
    CHECK_THROWS_AS(factor_projection(w, 1), Error);
    CHECK_NOTHROW(validate_word(w, 2));
    CHECK_THROWS_AS(validate_word(w, 1), Error);
    CHECK_THROWS_AS(validate_word(Word{Letter{1, 2, 1}}, 2), Error);
    CHECK_THROWS_AS(validate_word(Word{Letter{1, 0, 0}}, 2), Error);
}

TEST_CASE("cyclic reduction and proper powers") {
    CHECK(is_cyclically_reduced(parse_word("a1+ b1+")));
    CHECK(!is_cyclically_reduced(parse_word("a1+ b1+ a1-")));
    CHECK(!is_cyclically_reduced(parse_word("a1+ a1- b1+")));
    CHECK(is_cyclically_reduced(parse_word("a1+")));
    CHECK(is_proper_power(parse_word("a1+ b1+ a1+ b1+")));
    CHECK(is_proper_power(parse_word("a1+ a1+")));
    CHECK(!is_proper_power(parse_word("a1+ b1+ a1+")));
    CHECK(!is_proper_power(parse_word("a1+")));
    // Oracle: w is a proper power iff it is a nontrivial rotation of itself.
    std::mt19937_64 rng(44);
    for (int k = 0; k < 2000; ++k) {
        Word w = random_word(rng, 1, 8);
        if (w.size() < 2) continue;
        bool rotation = false;
        for (size_t r = 1; r < w.size() && !rotation; ++r) {
            Word x(w.begin() + static_cast<long>(r), w.end());
            x.insert(x.end(), w.begin(), w.begin() + static_cast<long>(r));
            rotation = x == w;
        }
        CHECK(is_proper_power(w) == rotation);
    }
}

TEST_CASE("random loop words satisfy their contract and are seeded") {
    auto words = random_loop_words(2, 100, 8, 1);
    CHECK(words.size() == 100);
    std::set<Word> distinct(words.begin(), words.end());
    CHECK(distinct.size() == 100);
    for (const Word& w : words) {
        CHECK(!w.empty());
        CHECK(w.size() <= 12);
        CHECK(is_cyclically_reduced(w));
        CHECK(!is_proper_power(w));
        CHECK(word_to_itinerary(w, 2).size() <= 8);
    }
    CHECK(random_loop_words(2, 100, 8, 1) == words);
    CHECK(random_loop_words(2, 100, 8, 2) != words);
    auto short_words = random_loop_words(3, 30, 2, 5, 6);
    for (const Word& w : short_words) CHECK(word_to_itinerary(w, 3).size() <= 2);
    CHECK_THROWS_AS(random_loop_words(0, 1, 1, 1), Error);
    CHECK_THROWS_AS(random_loop_words(1, 10, 1, 1, 1), Error);  // only 4 one-letter words exist
}
