#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wh {

enum class Hemisphere : std::uint8_t { Upper, Lower };

// A single bypass: letter a_i (upper branch affix) or b_i (lower), raised
// to an exponent in 1..n_i-1. Negative bypasses are expressed through
// exponents n_i - 1, so no inverse letters exist.
struct Letter {
    Hemisphere hemisphere;
    int affix;     // 0-based affix index within its hemisphere
    int exponent;  // 1..n-1 in normal form

    auto operator<=>(const Letter&) const = default;
};

// Cyclic orders n_i of the bypass letters: a_i^{n_i} = e.
struct AffixOrders {
    std::vector<int> upper;
    std::vector<int> lower;

    int order(Hemisphere h, int affix) const {
        const auto& v = (h == Hemisphere::Upper) ? upper : lower;
        return v.at(static_cast<std::size_t>(affix));
    }
    int order(const Letter& l) const { return order(l.hemisphere, l.affix); }
};

enum class TruncationSide { Plus, Minus };

// A bypass word in normal form: adjacent letters never share
// (hemisphere, affix) and exponents are reduced mod the affix order.
// The empty word is the identity e.
class Word {
public:
    Word() = default;

    static Word letter(Hemisphere h, int affix, int exponent, const AffixOrders& orders);
    static Word from_letters(std::span<const Letter> letters, const AffixOrders& orders);

    bool empty() const { return letters_.empty(); }
    std::size_t size() const { return letters_.size(); }
    std::span<const Letter> letters() const { return letters_; }
    const Letter& at(std::size_t i) const { return letters_[i]; }

    // Total bypass count (sum of exponents); the BFS length metric.
    int bypass_count() const;

    bool operator==(const Word&) const = default;
    auto operator<=>(const Word&) const = default;

    std::string to_string() const;  // "a1 b2^2", "e" when empty

private:
    std::vector<Letter> letters_;
    friend Word normalize_letters(std::vector<Letter> raw, const AffixOrders& orders);
    friend Word truncate(const Word& w, TruncationSide side);
};

Word compose(const Word& w, const Word& v, const AffixOrders& orders);
Word invert(const Word& w, const AffixOrders& orders);

// Drops the maximal leading prefix of upper-hemisphere letters (Plus) or
// lower-hemisphere letters (Minus).
Word truncate(const Word& w, TruncationSide side);

// [w, w^+, w^{+-}, w^{+-+}, ...] (or the minus-first analogue) down to e.
// Steps that leave the word unchanged are not repeated in the list, so
// consecutive entries strictly shorten and the chain is finite.
std::vector<Word> truncation_chain(const Word& w, TruncationSide start);

// Parses "a1 a2 b1^2" (1-based indices, whitespace separated) or "e".
Word parse_word(std::string_view text, const AffixOrders& orders);

} // namespace wh
