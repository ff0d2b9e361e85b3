#include "wh/words.hpp"

#include "wh/error.hpp"

#include <cctype>
#include <charconv>

namespace wh {

namespace {

int reduce_mod(int exponent, int order) {
    int e = exponent % order;
    if (e < 0) e += order;
    return e;
}

} // namespace

// Stack-based normalization: push letters left to right, merging a pushed
// letter into the stack top when they share (hemisphere, affix). A merge
// that reduces the exponent to 0 pops the top, which can cascade.
Word normalize_letters(std::vector<Letter> raw, const AffixOrders& orders) {
    Word out;
    auto& stack = out.letters_;
    stack.reserve(raw.size());
    for (const Letter& l : raw) {
        int order = orders.order(l);
        if (order < 1) throw InputError("affix order must be at least 1");
        int e = reduce_mod(l.exponent, order);
        if (e == 0) continue;
        if (!stack.empty() && stack.back().hemisphere == l.hemisphere &&
            stack.back().affix == l.affix) {
            int merged = reduce_mod(stack.back().exponent + e, order);
            stack.pop_back();
            if (merged != 0) stack.push_back({l.hemisphere, l.affix, merged});
        } else {
            stack.push_back({l.hemisphere, l.affix, e});
        }
    }
    return out;
}

Word Word::letter(Hemisphere h, int affix, int exponent, const AffixOrders& orders) {
    std::vector<Letter> raw{{h, affix, exponent}};
    return normalize_letters(std::move(raw), orders);
}

Word Word::from_letters(std::span<const Letter> letters, const AffixOrders& orders) {
    return normalize_letters(std::vector<Letter>(letters.begin(), letters.end()), orders);
}

int Word::bypass_count() const {
    int n = 0;
    for (const Letter& l : letters_) n += l.exponent;
    return n;
}

std::string Word::to_string() const {
    if (letters_.empty()) return "e";
    std::string s;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
        if (i > 0) s += ' ';
        s += (letters_[i].hemisphere == Hemisphere::Upper) ? 'a' : 'b';
        s += std::to_string(letters_[i].affix + 1);
        if (letters_[i].exponent != 1) {
            s += '^';
            s += std::to_string(letters_[i].exponent);
        }
    }
    return s;
}

Word compose(const Word& w, const Word& v, const AffixOrders& orders) {
    std::vector<Letter> raw;
    raw.reserve(w.size() + v.size());
    raw.insert(raw.end(), w.letters().begin(), w.letters().end());
    raw.insert(raw.end(), v.letters().begin(), v.letters().end());
    return normalize_letters(std::move(raw), orders);
}

Word invert(const Word& w, const AffixOrders& orders) {
    std::vector<Letter> raw;
    raw.reserve(w.size());
    for (auto it = w.letters().rbegin(); it != w.letters().rend(); ++it) {
        int order = orders.order(*it);
        raw.push_back({it->hemisphere, it->affix, order - it->exponent});
    }
    return normalize_letters(std::move(raw), orders);
}

Word truncate(const Word& w, TruncationSide side) {
    const Hemisphere drop =
        (side == TruncationSide::Plus) ? Hemisphere::Upper : Hemisphere::Lower;
    std::size_t p = 0;
    while (p < w.size() && w.at(p).hemisphere == drop) ++p;
    if (p == 0) return w;
    // A suffix of a normal-form word is already in normal form.
    Word out;
    out.letters_.assign(w.letters().begin() + p, w.letters().end());
    return out;
}

std::vector<Word> truncation_chain(const Word& w, TruncationSide start) {
    std::vector<Word> chain{w};
    TruncationSide side = start;
    Word cur = w;
    while (!cur.empty()) {
        Word next = truncate(cur, side);
        side = (side == TruncationSide::Plus) ? TruncationSide::Minus : TruncationSide::Plus;
        if (next == cur) continue;  // no-op step; the other side must shorten
        chain.push_back(next);
        cur = next;
    }
    return chain;
}

Word parse_word(std::string_view text, const AffixOrders& orders) {
    std::vector<Letter> raw;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    skip_ws();
    if (text.substr(pos, 1) == "e") {
        std::size_t after = pos + 1;
        while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
        if (after >= text.size()) return Word();
    }
    while (true) {
        skip_ws();
        if (pos >= text.size()) break;
        char c = text[pos];
        if (c != 'a' && c != 'b') throw ParseError("expected letter 'a' or 'b'", pos);
        Hemisphere h = (c == 'a') ? Hemisphere::Upper : Hemisphere::Lower;
        ++pos;
        std::size_t dstart = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == dstart) throw ParseError("expected affix index", pos);
        int index = 0;
        std::from_chars(text.data() + dstart, text.data() + pos, index);
        if (index < 1) throw ParseError("affix indices are 1-based", dstart);
        int exponent = 1;
        if (pos < text.size() && text[pos] == '^') {
            ++pos;
            std::size_t estart = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos == estart) throw ParseError("expected exponent", pos);
            std::from_chars(text.data() + estart, text.data() + pos, exponent);
        }
        const auto& v = (h == Hemisphere::Upper) ? orders.upper : orders.lower;
        if (static_cast<std::size_t>(index) > v.size())
            throw InputError("letter index out of range for this surface: " +
                             std::string(1, c) + std::to_string(index));
        raw.push_back({h, index - 1, exponent});
    }
    return normalize_letters(std::move(raw), orders);
}

} // namespace wh
