#include "kleinian/words.hpp"

#include "kleinian/errors.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

namespace kleinian {

bool letter_fits(const Letter& l, const Plane& b) {
    return l.factor >= 1 && l.factor <= static_cast<int>(b.size()) && b[l.factor - 1] - '0' == l.gen;
}

bool is_freely_reduced(const Word& w) {
    for (size_t i = 1; i < w.size(); ++i)
        if (w[i] == w[i - 1].inverse()) return false;
    return true;
}

bool is_cyclically_reduced(const Word& w) {
    return is_freely_reduced(w) && (w.size() < 2 || !(w.front() == w.back().inverse()));
}

Word free_reduce(const Word& w) {
    Word out;
    for (const Letter& l : w) {
        if (!out.empty() && out.back() == l.inverse())
            out.pop_back();
        else
            out.push_back(l);
    }
    return out;
}

Word inverse(const Word& w) {
    Word out;
    out.reserve(w.size());
    for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(it->inverse());
    return out;
}

std::vector<Word> factor_projection(const Word& w, int n) {
    std::vector<Word> parts(static_cast<size_t>(n));
    for (const Letter& l : w) {
        if (l.factor < 1 || l.factor > n) throw Error(ErrorCode::InvalidParameters, "letter factor out of range");
        parts[static_cast<size_t>(l.factor - 1)].push_back(l);
    }
    return parts;
}

Word reduce(const Word& w) {
    int n = 0;
    for (const Letter& l : w) n = std::max(n, l.factor);
    Word out;
    for (const Word& part : factor_projection(w, n)) {
        Word r = free_reduce(part);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

void validate_word(const Word& w, int n) {
    for (const Letter& l : w) {
        if (l.factor < 1 || l.factor > n || (l.gen != 0 && l.gen != 1) || (l.exp != 1 && l.exp != -1))
            throw Error(ErrorCode::InvalidParameters, "letter " + format_letter(l) + " invalid for n = " +
                                                          std::to_string(n));
    }
}

Itinerary word_to_itinerary(const Word& w, int n) {
    if (w.empty()) throw Error(ErrorCode::EmptyWord, "cannot syllabify the empty word");
    validate_word(w, n);
    Itinerary out;
    std::string constraint(static_cast<size_t>(n), '?');
    Word current;
    auto close = [&]() {
        Plane b = constraint;
        std::replace(b.begin(), b.end(), '?', '0');
        out.push_back(Syllable{b, current});
        current.clear();
        constraint.assign(static_cast<size_t>(n), '?');
    };
    for (const Letter& l : w) {
        char want = static_cast<char>('0' + l.gen);
        char& slot = constraint[static_cast<size_t>(l.factor - 1)];
        if (slot != '?' && slot != want) {
            close();
        }
        constraint[static_cast<size_t>(l.factor - 1)] = want;
        current.push_back(l);
    }
    close();
    return out;
}

Word concatenate(const Itinerary& it) {
    Word out;
    for (const Syllable& s : it) out.insert(out.end(), s.subword.begin(), s.subword.end());
    return out;
}

std::string format_letter(const Letter& l) {
    return std::string(1, l.gen == 0 ? 'a' : 'b') + std::to_string(l.factor) + (l.exp > 0 ? "+" : "-");
}

std::string format_word(const Word& w) {
    std::string out;
    for (size_t i = 0; i < w.size(); ++i) {
        if (i) out += ' ';
        out += format_letter(w[i]);
    }
    return out;
}

std::string format_itinerary(const Itinerary& it) {
    std::string out;
    for (size_t i = 0; i < it.size(); ++i) {
        if (i) out += " | ";
        out += it[i].plane + ":[" + format_word(it[i].subword) + "]";
    }
    return out;
}

Word parse_word(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    Word out;
    while (in >> tok) {
        if (tok.size() < 3 || (tok[0] != 'a' && tok[0] != 'b') || (tok.back() != '+' && tok.back() != '-'))
            throw Error(ErrorCode::ParseError, "bad letter token '" + tok + "'");
        std::string digits = tok.substr(1, tok.size() - 2);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); }))
            throw Error(ErrorCode::ParseError, "bad factor index in '" + tok + "'");
        int factor = std::stoi(digits);
        if (factor < 1) throw Error(ErrorCode::ParseError, "factor index must be >= 1 in '" + tok + "'");
        out.push_back(Letter{factor, tok[0] == 'a' ? 0 : 1, tok.back() == '+' ? 1 : -1});
    }
    return out;
}

bool is_proper_power(const Word& w) {
    const size_t len = w.size();
    for (size_t d = 1; d < len; ++d) {
        if (len % d != 0) continue;
        bool periodic = true;
        for (size_t i = d; i < len && periodic; ++i) periodic = w[i] == w[i - d];
        if (periodic) return true;
    }
    return false;
}

std::vector<Word> random_loop_words(int n, int count, int max_syllables, std::uint64_t seed, int max_length) {
    if (n < 1 || count < 0 || max_syllables < 1 || max_length < 1)
        throw Error(ErrorCode::InvalidParameters, "random_loop_words: bad parameters");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> length(1, max_length), factor(1, n), bit(0, 1);
    std::vector<Word> out;
    long attempts = 0;
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > 1000L * (count + 1)) throw Error(ErrorCode::InvalidParameters, "cannot draw enough distinct words");
        Word w;
        const int len = length(rng);
        while (static_cast<int>(w.size()) < len) {
            Letter l{factor(rng), bit(rng), bit(rng) ? 1 : -1};
            if (!w.empty() && w.back() == l.inverse()) continue;
            w.push_back(l);
        }
        if (!is_cyclically_reduced(w) || is_proper_power(w)) continue;
        if (static_cast<int>(word_to_itinerary(w, n).size()) > max_syllables) continue;
        if (std::find(out.begin(), out.end(), w) != out.end()) continue;
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace kleinian
