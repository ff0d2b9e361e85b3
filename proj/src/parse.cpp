#include "wh/parse.hpp"

#include "wh/error.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace wh {

void SymbolTable::define(const std::string& name, Expr value) {
    if (name == "k" || name == "i" || name == "sqrt")
        throw InputError("cannot redefine builtin name '" + name + "'");
    symbols_[name] = value;
}

void SymbolTable::define(const std::string& name, Complex value) {
    define(name, Expr::constant(value));
}

const Expr* SymbolTable::lookup(const std::string& name) const {
    auto it = symbols_.find(name);
    return it == symbols_.end() ? nullptr : &it->second;
}

namespace {

struct Parser {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t last_token_end = 0;
    const SymbolTable* symbols;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool accept(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            last_token_end = pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg, std::size_t at) {
        throw ParseError(msg, at);
    }

    // Position used for "expected X" errors: just past the previous token,
    // so that trailing whitespace does not shift the report.
    std::size_t expect_pos() {
        skip_ws();
        return pos < text.size() ? pos : last_token_end;
    }

    Expr parse_expr() {
        Expr acc = parse_term();
        for (;;) {
            if (accept('+')) acc = acc + parse_term();
            else if (accept('-')) acc = acc - parse_term();
            else return acc;
        }
    }

    Expr parse_term() {
        Expr acc = parse_unary();
        for (;;) {
            if (accept('*')) acc = acc * parse_unary();
            else if (accept('/')) acc = acc / parse_unary();
            else return acc;
        }
    }

    Expr parse_unary() {
        if (accept('-')) return -parse_unary();
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (accept('^')) {
            skip_ws();
            bool neg = false;
            if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
                neg = text[pos] == '-';
                ++pos;
            }
            std::size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos == start) fail("expected integer exponent", expect_pos());
            int e = 0;
            std::from_chars(text.data() + start, text.data() + pos, e);
            last_token_end = pos;
            return Expr::power(base, neg ? -e : e);
        }
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos >= text.size()) fail("expected operand", last_token_end);
        char c = text[pos];
        if (c == '(') {
            ++pos;
            Expr inner = parse_expr();
            if (!accept(')')) fail("expected ')'", expect_pos());
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    Expr parse_number() {
        std::size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        }
        if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
            if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
                while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            } else {
                pos = mark;  // 'e' starts a following name, not an exponent
            }
        }
        std::string digits(text.substr(start, pos - start));
        char* end = nullptr;
        double value = std::strtod(digits.c_str(), &end);
        if (end != digits.c_str() + digits.size()) fail("malformed number", start);
        bool imaginary = false;
        if (pos < text.size() && text[pos] == 'i') {
            // 'i' immediately after digits is the imaginary suffix unless it
            // starts a longer identifier (e.g. "2in" stays an error later).
            bool longer = pos + 1 < text.size() &&
                          (std::isalnum(static_cast<unsigned char>(text[pos + 1])) || text[pos + 1] == '_');
            if (!longer) {
                imaginary = true;
                ++pos;
            }
        }
        last_token_end = pos;
        return Expr::constant(imaginary ? Complex(0.0, value) : Complex(value, 0.0));
    }

    Expr parse_name() {
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        std::string name(text.substr(start, pos - start));
        last_token_end = pos;
        if (name == "sqrt") {
            if (!accept('(')) fail("expected '(' after sqrt", expect_pos());
            Expr inner = parse_expr();
            if (!accept(')')) fail("expected ')'", expect_pos());
            return Expr::sqrt(inner);
        }
        if (name == "k") return Expr::variable();
        if (name == "i") return Expr::constant(Complex(0.0, 1.0));
        if (const Expr* bound = symbols->lookup(name)) return *bound;
        fail("unbound symbol '" + name + "'", start);
    }
};

} // namespace

Expr parse_expression(std::string_view text, const SymbolTable& symbols) {
    Parser p{text, 0, 0, &symbols};
    if (p.at_end()) throw ParseError("empty expression", 0);
    Expr e = p.parse_expr();
    if (!p.at_end()) p.fail("unexpected trailing input", p.pos);
    return e;
}

Complex parse_complex_literal(std::string_view text) {
    SymbolTable empty;
    Expr e = parse_expression(text, empty);
    // Literals must be constant: evaluate with an empty tower; any appearance
    // of k or a radical is an error.
    std::vector<Expr> rads;
    e.collect_radicals(rads);
    if (!rads.empty()) throw InputError("complex literal cannot contain radicals");
    RadicalTower tower;
    BranchAssignment none;
    try {
        Complex probe0 = evaluate(e, Complex(0.0, 0.0), tower, none);
        Complex probe1 = evaluate(e, Complex(1.0, 0.0), tower, none);
        if (probe0 != probe1) throw InputError("complex literal cannot depend on k");
        return probe0;
    } catch (const EvalError& err) {
        throw InputError(std::string("bad complex literal: ") + err.what());
    }
}

} // namespace wh
