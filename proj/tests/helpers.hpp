#pragma once

#include "wh/matrix_function.hpp"
#include "wh/parse.hpp"

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace wh::test {

struct MatrixBuilder {
    SymbolTable symbols;
    std::vector<Expr> tower_seed;

    MatrixBuilder& constant(const std::string& name, Complex value) {
        symbols.define(name, value);
        return *this;
    }

    MatrixBuilder& radical(const std::string& name, const std::string& source) {
        Expr r = parse_expression(source, symbols);
        symbols.define(name, r);
        tower_seed.push_back(r);
        return *this;
    }

    MatrixFunction build(int dim, std::initializer_list<const char*> entries,
                         double anchor = 0.0) {
        std::vector<Expr> parsed;
        for (const char* e : entries) parsed.push_back(parse_expression(e, symbols));
        return MatrixFunction(dim, std::move(parsed), anchor, tower_seed);
    }
};

// The two-sheet reflection-coefficient style matrix with entries
// (1, (k1-s)/(k2+s); (k2-s)/(k1+s), 1), s = sqrt(k0^2 - k^2).
inline MatrixFunction daniele_matrix(Complex k0, Complex k1, Complex k2) {
    MatrixBuilder b;
    b.constant("k0", k0).constant("k1", k1).constant("k2", k2);
    b.radical("s", "sqrt(k0^2 - k^2)");
    return b.build(2, {"1", "(k1 - s)/(k2 + s)", "(k2 - s)/(k1 + s)", "1"});
}

// The 3x3 branch-commutative example with a single radical s. The k-part
// and the s-part anticommute unless the corner entry is -k, which is the
// unique single-entry choice making all sheet values commute.
inline MatrixFunction commuting_3x3(Complex k0) {
    MatrixBuilder b;
    b.constant("k0", k0);
    b.radical("s", "sqrt(k0^2 - k^2)");
    return b.build(3, {"k", "2*k", "s", "2*k", "k", "-s", "-s", "s", "-k"});
}

// The nested-tower 2x2 example: (s1, s2; -s2, k*s1) with
// s1 = sqrt(k1^2 - k^2), s2 = sqrt(k2^2 - s1).
inline MatrixFunction nested_2x2(Complex k1, Complex k2) {
    MatrixBuilder b;
    b.constant("k1", k1).constant("k2", k2);
    b.radical("s1", "sqrt(k1^2 - k^2)");
    b.radical("s2", "sqrt(k2^2 - s1)");
    return b.build(2, {"s1", "s2", "-s2", "k*s1"});
}

// 1x1 matrices for the balance controls.
inline MatrixFunction scalar_balanced() {
    MatrixBuilder b;
    b.radical("t", "sqrt(2 + k^2)");
    b.radical("u", "sqrt(1 + t)");
    return b.build(1, {"u"});
}

inline MatrixFunction scalar_unbalanced() {
    MatrixBuilder b;
    b.radical("p", "sqrt(i + k)");
    b.radical("q", "sqrt(-i + k)");
    return b.build(1, {"p + q"});
}

} // namespace wh::test
