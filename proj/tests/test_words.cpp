#include "wh/error.hpp"
#include "wh/words.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace wh;

namespace {

// Two upper and two lower affixes, all of order 2 unless stated.
AffixOrders orders22() { return AffixOrders{{2, 2}, {2, 2}}; }

Word W(const char* text, const AffixOrders& orders) { return parse_word(text, orders); }

// Reference normalizer used as an independent oracle: applies relations
// in a random order until none applies.
Word random_order_normalize(std::vector<Letter> letters, const AffixOrders& orders,
                            std::mt19937_64& rng) {
    auto reduce_all = [&](std::vector<Letter>& v) {
        for (auto& l : v) {
            int n = orders.order(l);
            l.exponent = ((l.exponent % n) + n) % n;
        }
        std::erase_if(v, [](const Letter& l) { return l.exponent == 0; });
    };
    reduce_all(letters);
    for (;;) {
        std::vector<std::size_t> sites;
        for (std::size_t i = 0; i + 1 < letters.size(); ++i)
            if (letters[i].hemisphere == letters[i + 1].hemisphere &&
                letters[i].affix == letters[i + 1].affix)
                sites.push_back(i);
        if (sites.empty()) break;
        std::uniform_int_distribution<std::size_t> pick(0, sites.size() - 1);
        const std::size_t at = sites[pick(rng)];
        letters[at].exponent += letters[at + 1].exponent;
        letters.erase(letters.begin() + static_cast<std::ptrdiff_t>(at) + 1);
        reduce_all(letters);
    }
    return Word::from_letters(letters, orders);
}

std::vector<Letter> random_letters(std::mt19937_64& rng, std::size_t max_len,
                                   const AffixOrders& orders) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> hemi(0, 1);
    std::vector<Letter> letters;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const Hemisphere h = hemi(rng) ? Hemisphere::Upper : Hemisphere::Lower;
        const auto& v = (h == Hemisphere::Upper) ? orders.upper : orders.lower;
        std::uniform_int_distribution<int> affix(0, static_cast<int>(v.size()) - 1);
        const int a = affix(rng);
        std::uniform_int_distribution<int> expo(-3, 5);
        letters.push_back({h, a, expo(rng)});
    }
    return letters;
}

} // namespace

TEST_CASE("composition applies the cyclic relations") {
    const AffixOrders o = orders22();
    CHECK(compose(W("a1", o), W("a1", o), o).empty());
    CHECK(compose(W("a1 a2", o), W("b1", o), o) == W("a1 a2 b1", o));

    AffixOrders mixed{{2, 2}, {3, 2}};
    // b1^3 = e when the lower order is 3.
    CHECK(compose(W("a1 b1", mixed), W("b1 b1", mixed), mixed) == W("a1", mixed));
}

TEST_CASE("inversion reverses and complements exponents") {
    const AffixOrders o = orders22();
    CHECK(invert(Word(), o).empty());
    CHECK(invert(W("a1", o), o) == W("a1", o));
    CHECK(compose(W("a1 b2", o), invert(W("a1 b2", o), o), o).empty());
    CHECK(invert(W("a1 b2", o), o) == W("b2 a1", o));
}

TEST_CASE("truncation drops the maximal leading one-hemisphere prefix") {
    const AffixOrders o = orders22();
    const Word w = W("a1 a2 b1 b2", o);
    CHECK(truncate(w, TruncationSide::Plus) == W("b1 b2", o));
    CHECK(truncate(w, TruncationSide::Minus) == w);
    CHECK(truncate(truncate(w, TruncationSide::Plus), TruncationSide::Minus).empty());

    const Word v = W("b1 b2 a1 a2", o);
    CHECK(truncate(v, TruncationSide::Minus) == W("a1 a2", o));
    CHECK(truncate(v, TruncationSide::Plus) == v);
    CHECK(truncate(truncate(v, TruncationSide::Minus), TruncationSide::Plus).empty());

    CHECK(truncate(Word(), TruncationSide::Plus).empty());
}

TEST_CASE("truncation chains reach the identity") {
    const AffixOrders o = orders22();
    const std::vector<Word> chain =
        truncation_chain(W("a1 a2 b1 b2", o), TruncationSide::Plus);
    REQUIRE(chain.size() == 3);
    CHECK(chain[0] == W("a1 a2 b1 b2", o));
    CHECK(chain[1] == W("b1 b2", o));
    CHECK(chain[2].empty());

    const std::vector<Word> trivial = truncation_chain(Word(), TruncationSide::Plus);
    REQUIRE(trivial.size() == 1);
    CHECK(trivial[0].empty());

    // A word starting with a lower letter: the first plus step is a no-op
    // and is collapsed, the minus-first chain matches.
    const std::vector<Word> mixed =
        truncation_chain(W("b1 a1 b2", o), TruncationSide::Minus);
    REQUIRE(mixed.size() == 4);
    CHECK(mixed[0] == W("b1 a1 b2", o));
    CHECK(mixed[1] == W("a1 b2", o));
    CHECK(mixed[2] == W("b2", o));
    CHECK(mixed[3].empty());

    CHECK(truncation_chain(W("b1 a1 b2", o), TruncationSide::Plus) == mixed);
}

TEST_CASE("normalization is confluent under random rewriting order") {
    AffixOrders orders{{2, 3}, {4, 2}};
    std::mt19937_64 rng(20240817);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::vector<Letter> letters = random_letters(rng, 10, orders);
        const Word direct = Word::from_letters(letters, orders);
        const Word reference = random_order_normalize(letters, orders, rng);
        CHECK(direct == reference);
    }
}

TEST_CASE("truncation is idempotent per side") {
    const AffixOrders o = orders22();
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const Word w = Word::from_letters(random_letters(rng, 8, o), o);
        for (TruncationSide side : {TruncationSide::Plus, TruncationSide::Minus}) {
            const Word once = truncate(w, side);
            CHECK(truncate(once, side) == once);
        }
    }
}

TEST_CASE("alternating truncation terminates for every short word") {
    const AffixOrders o = orders22();
    // Enumerate all normal-form letter sequences up to length 12 over
    // a1, a2, b1, b2 (exponents are forced to 1 by order 2).
    std::vector<Letter> alphabet{{Hemisphere::Upper, 0, 1},
                                 {Hemisphere::Upper, 1, 1},
                                 {Hemisphere::Lower, 0, 1},
                                 {Hemisphere::Lower, 1, 1}};
    long long checked = 0;
    std::vector<Letter> current;
    auto rec = [&](auto&& self, std::size_t depth) -> void {
        if (depth > 0) {
            const Word w = Word::from_letters(current, o);
            const std::vector<Word> chain = truncation_chain(w, TruncationSide::Plus);
            REQUIRE(chain.back().empty());
            for (std::size_t i = 1; i < chain.size(); ++i)
                REQUIRE(chain[i].size() < chain[i - 1].size());
            ++checked;
        }
        if (depth == 12) return;
        for (const Letter& l : alphabet) {
            if (!current.empty() && current.back().hemisphere == l.hemisphere &&
                current.back().affix == l.affix)
                continue;
            current.push_back(l);
            self(self, depth + 1);
            current.pop_back();
        }
    };
    rec(rec, 0);
    CHECK(checked == 4L * (std::pow(3.0, 12) - 1) / 2);
}

TEST_CASE("inversion is an involution and an antihomomorphism") {
    AffixOrders orders{{2, 5}, {3, 2}};
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const Word w = Word::from_letters(random_letters(rng, 6, orders), orders);
        const Word v = Word::from_letters(random_letters(rng, 6, orders), orders);
        CHECK(invert(invert(w, orders), orders) == w);
        CHECK(invert(compose(w, v, orders), orders) ==
              compose(invert(v, orders), invert(w, orders), orders));
        CHECK(compose(w, invert(w, orders), orders).empty());
        CHECK(compose(invert(w, orders), w, orders).empty());
    }
}

TEST_CASE("word round trip through text") {
    AffixOrders orders{{2, 2}, {3, 2}};
    const Word w = W("a1 b1^2 a2", orders);
    CHECK(parse_word(w.to_string(), orders) == w);
    CHECK(Word().to_string() == "e");
    CHECK(parse_word("e", orders).empty());
    CHECK_THROWS_AS(parse_word("c1", orders), ParseError);
    CHECK_THROWS_AS(parse_word("a9", orders), InputError);
}
