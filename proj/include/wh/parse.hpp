#pragma once

#include "wh/expr.hpp"

#include <map>
#include <string>
#include <string_view>

namespace wh {

// Names visible to the expression parser. `k` is always the variable and
// `i` the imaginary unit; neither can be redefined. Values may be whole
// sub-expressions, which is how named radicals enter matrix entries.
class SymbolTable {
public:
    void define(const std::string& name, Expr value);
    void define(const std::string& name, Complex value);
    const Expr* lookup(const std::string& name) const;

private:
    std::map<std::string, Expr> symbols_;
};

// Recursive-descent parser for the expression grammar:
//
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := ('-'|'+')* power
//   power  := atom ('^' '-'? digits)?
//   atom   := number | name | 'sqrt' '(' expr ')' | '(' expr ')'
//   number := digits ('.' digits)? (('e'|'E') sign? digits)? ('i')?
//
// Throws ParseError with a byte offset on malformed input and on unbound
// names.
Expr parse_expression(std::string_view text, const SymbolTable& symbols);

// Parses a standalone complex literal such as "1+2i", "-0.5i" or "3".
Complex parse_complex_literal(std::string_view text);

} // namespace wh
