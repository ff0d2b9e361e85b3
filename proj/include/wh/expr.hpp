#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wh {

using Complex = std::complex<double>;

enum class NodeKind : std::uint8_t {
    Variable,  // the independent variable k
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    Negate,
    Power,     // integer exponent
    Sqrt,
};

struct ExprNode {
    NodeKind kind;
    int exponent = 0;          // Power only
    Complex value{0.0, 0.0};   // Constant only
    const ExprNode* lhs = nullptr;
    const ExprNode* rhs = nullptr;
};

// Immutable handle to a hash-consed DAG node. Two structurally identical
// expressions built in the same process share the same node, so handle
// equality is structural equality.
class Expr {
public:
    Expr() = default;

    static Expr variable();
    static Expr constant(Complex c);
    static Expr constant(double re) { return constant(Complex(re, 0.0)); }
    static Expr add(Expr a, Expr b);
    static Expr sub(Expr a, Expr b);
    static Expr mul(Expr a, Expr b);
    static Expr div(Expr a, Expr b);
    static Expr negate(Expr a);
    static Expr power(Expr base, int exponent);
    static Expr sqrt(Expr radicand);

    friend Expr operator+(Expr a, Expr b) { return add(a, b); }
    friend Expr operator-(Expr a, Expr b) { return sub(a, b); }
    friend Expr operator*(Expr a, Expr b) { return mul(a, b); }
    friend Expr operator/(Expr a, Expr b) { return div(a, b); }
    Expr operator-() const { return negate(*this); }

    bool is_null() const { return node_ == nullptr; }
    NodeKind kind() const { return node_->kind; }
    Complex constant_value() const { return node_->value; }
    int exponent() const { return node_->exponent; }
    Expr lhs() const { return Expr(node_->lhs); }
    Expr rhs() const { return Expr(node_->rhs); }
    const ExprNode* node() const { return node_; }

    bool operator==(const Expr& other) const { return node_ == other.node_; }
    bool operator!=(const Expr& other) const { return node_ != other.node_; }

    std::string to_string() const;

    // Number of sqrt nodes nested strictly inside this node's subtree,
    // counted as maximal nesting level (0 when radical-free).
    int radical_depth() const;

    // All distinct sqrt nodes in the subtree, first-occurrence DFS order.
    void collect_radicals(std::vector<Expr>& out) const;

private:
    explicit Expr(const ExprNode* n) : node_(n) {}
    const ExprNode* node_ = nullptr;

    friend class ExprPool;
};

// One sign per radical id; +1 keeps the principal value of the radical,
// -1 negates it.
class BranchAssignment {
public:
    BranchAssignment() = default;
    explicit BranchAssignment(std::size_t n, int sign = +1)
        : signs_(n, static_cast<std::int8_t>(sign)) {}

    static BranchAssignment all_plus(std::size_t n) { return BranchAssignment(n, +1); }

    int sign(std::size_t i) const { return signs_[i]; }
    void set(std::size_t i, int s) { signs_[i] = static_cast<std::int8_t>(s); }
    std::size_t size() const { return signs_.size(); }

    BranchAssignment flipped(std::size_t i) const {
        BranchAssignment out = *this;
        out.signs_[i] = static_cast<std::int8_t>(-out.signs_[i]);
        return out;
    }

    bool operator==(const BranchAssignment&) const = default;

    std::string to_string() const;  // e.g. "+-+"

private:
    std::vector<std::int8_t> signs_;
};

// The ordered radical tower of a set of expressions: every distinct sqrt
// node, sorted innermost-first (by nesting depth, ties broken by first
// occurrence across the root list). Radical ids index this order.
class RadicalTower {
public:
    RadicalTower() = default;

    static RadicalTower collect(std::span<const Expr> roots);

    std::size_t size() const { return radicals_.size(); }
    Expr radical(std::size_t id) const { return radicals_[id]; }
    Expr radicand(std::size_t id) const { return radicals_[id].lhs(); }

    // -1 when the node is not a radical of this tower.
    int index_of(const ExprNode* sqrt_node) const;

    // Ids of radicals occurring strictly inside radicand(id); all < id.
    const std::vector<int>& inner_radicals(std::size_t id) const {
        return inner_[id];
    }

private:
    std::vector<Expr> radicals_;
    std::vector<std::vector<int>> inner_;
};

// Bottom-up evaluation. Every sqrt node takes the principal square root
// of its (already branch-resolved) radicand, multiplied by the assigned
// sign. Throws EvalError on division by zero.
Complex evaluate(Expr e, Complex k, const RadicalTower& tower,
                 const BranchAssignment& branches);

// Structural degree bound of an expression viewed as a rational function
// of k, with sqrt(a) bounded by half the bound of a (rounded up).
// Returns {numerator bound, denominator bound}.
std::pair<int, int> degree_bound(Expr e);

} // namespace wh
