#pragma once
// Words in F_2^n: letters a_{j,s}^{+-1}, free reduction per factor, the
// direct-product normal form, and greedy syllabification into planes.

#include <cstdint>
#include <string>
#include <vector>

namespace kleinian {

struct Letter {
    int factor = 1;  // 1..n
    int gen = 0;     // 0 -> a, 1 -> b
    int exp = 1;     // +1 or -1

    Letter inverse() const { return Letter{factor, gen, -exp}; }
    bool operator==(const Letter&) const = default;
    auto operator<=>(const Letter&) const = default;
};

using Word = std::vector<Letter>;

// Plane Sigma_b as a bit string, character j-1 holding b_j.
using Plane = std::string;

struct Syllable {
    Plane plane;
    Word subword;
    bool operator==(const Syllable&) const = default;
};

using Itinerary = std::vector<Syllable>;

bool letter_fits(const Letter& l, const Plane& b);
bool is_freely_reduced(const Word& w);
bool is_cyclically_reduced(const Word& w);
Word free_reduce(const Word& w);
Word inverse(const Word& w);
// F_2^n normal form: reduced factor-1 word, then factor 2, and so on.
Word reduce(const Word& w);
// Splits a word into its per-factor subsequences (index j-1 holds factor j).
std::vector<Word> factor_projection(const Word& w, int n);

// Greedy maximal runs fitting one plane; free bits of a plane are 0.
Itinerary word_to_itinerary(const Word& w, int n);
Word concatenate(const Itinerary& it);

// Token syntax: <gen><factor><sign>, gen in {a,b}, e.g. "a1+ b2-".
Word parse_word(const std::string& text);
std::string format_letter(const Letter& l);
std::string format_word(const Word& w);
std::string format_itinerary(const Itinerary& it);

void validate_word(const Word& w, int n);

// True if w equals u^k for some shorter u.
bool is_proper_power(const Word& w);

// Distinct seeded random loop words: cyclically reduced, not proper powers,
// length in [1, max_length], itinerary of at most max_syllables syllables.
std::vector<Word> random_loop_words(int n, int count, int max_syllables, std::uint64_t seed, int max_length = 12);

}  // namespace kleinian
