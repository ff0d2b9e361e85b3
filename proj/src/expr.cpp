#include "wh/expr.hpp"

#include "wh/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <deque>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

namespace wh {

namespace {

struct NodeKey {
    NodeKind kind;
    int exponent;
    std::uint64_t value_re;
    std::uint64_t value_im;
    const ExprNode* lhs;
    const ExprNode* rhs;

    bool operator==(const NodeKey&) const = default;
};

std::uint64_t bits_of(double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, sizeof(u));
    return u;
}

struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(static_cast<std::uint64_t>(k.kind));
        mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(k.exponent)));
        mix(k.value_re);
        mix(k.value_im);
        mix(reinterpret_cast<std::uintptr_t>(k.lhs));
        mix(reinterpret_cast<std::uintptr_t>(k.rhs));
        return static_cast<std::size_t>(h);
    }
};

// Process-wide intern table. Nodes live forever; expressions are tiny.
class ExprPoolImpl {
public:
    const ExprNode* intern(NodeKind kind, int exponent, Complex value,
                           const ExprNode* lhs, const ExprNode* rhs) {
        NodeKey key{kind, exponent, bits_of(value.real()), bits_of(value.imag()), lhs, rhs};
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = table_.find(key);
        if (it != table_.end()) return it->second;
        nodes_.push_back(ExprNode{kind, exponent, value, lhs, rhs});
        const ExprNode* node = &nodes_.back();
        table_.emplace(key, node);
        return node;
    }

    static ExprPoolImpl& instance() {
        static ExprPoolImpl pool;
        return pool;
    }

private:
    std::mutex mutex_;
    std::deque<ExprNode> nodes_;
    std::unordered_map<NodeKey, const ExprNode*, NodeKeyHash> table_;
};

const ExprNode* intern(NodeKind kind, int exponent, Complex value,
                       const ExprNode* lhs, const ExprNode* rhs) {
    return ExprPoolImpl::instance().intern(kind, exponent, value, lhs, rhs);
}

} // namespace

class ExprPool {
public:
    static Expr make(NodeKind kind, int exponent, Complex value, Expr lhs, Expr rhs) {
        return Expr(intern(kind, exponent, value, lhs.node(), rhs.node()));
    }
    static Expr wrap(const ExprNode* n) { return Expr(n); }
};

Expr Expr::variable() { return ExprPool::make(NodeKind::Variable, 0, {}, {}, {}); }
Expr Expr::constant(Complex c) { return ExprPool::make(NodeKind::Constant, 0, c, {}, {}); }
Expr Expr::add(Expr a, Expr b) { return ExprPool::make(NodeKind::Add, 0, {}, a, b); }
Expr Expr::sub(Expr a, Expr b) { return ExprPool::make(NodeKind::Sub, 0, {}, a, b); }
Expr Expr::mul(Expr a, Expr b) { return ExprPool::make(NodeKind::Mul, 0, {}, a, b); }
Expr Expr::div(Expr a, Expr b) { return ExprPool::make(NodeKind::Div, 0, {}, a, b); }
Expr Expr::negate(Expr a) { return ExprPool::make(NodeKind::Negate, 0, {}, a, {}); }
Expr Expr::power(Expr base, int exponent) {
    return ExprPool::make(NodeKind::Power, exponent, {}, base, {});
}
Expr Expr::sqrt(Expr radicand) { return ExprPool::make(NodeKind::Sqrt, 0, {}, radicand, {}); }

namespace {

void format_double(std::string& out, double d) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), d);
    out.append(buf, res.ptr);
}

void format_complex(std::string& out, Complex c) {
    if (c.imag() == 0.0) {
        if (c.real() < 0.0) {
            out += '(';
            format_double(out, c.real());
            out += ')';
        } else {
            format_double(out, c.real());
        }
        return;
    }
    out += '(';
    if (c.real() != 0.0) {
        format_double(out, c.real());
        if (c.imag() >= 0.0) out += '+';
    }
    format_double(out, c.imag());
    out += "i)";
}

int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Negate: return 3;
        case NodeKind::Power: return 4;
        default: return 5;
    }
}

void print_node(std::string& out, const ExprNode* n, int parent_prec) {
    const int prec = precedence(n->kind);
    const bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (n->kind) {
        case NodeKind::Variable: out += 'k'; break;
        case NodeKind::Constant: format_complex(out, n->value); break;
        case NodeKind::Add:
            print_node(out, n->lhs, prec);
            out += " + ";
            print_node(out, n->rhs, prec + 1);
            break;
        case NodeKind::Sub:
            print_node(out, n->lhs, prec);
            out += " - ";
            print_node(out, n->rhs, prec + 1);
            break;
        case NodeKind::Mul:
            print_node(out, n->lhs, prec);
            out += "*";
            print_node(out, n->rhs, prec + 1);
            break;
        case NodeKind::Div:
            print_node(out, n->lhs, prec);
            out += "/";
            print_node(out, n->rhs, prec + 1);
            break;
        case NodeKind::Negate:
            out += '-';
            print_node(out, n->lhs, prec);
            break;
        case NodeKind::Power:
            print_node(out, n->lhs, prec + 1);
            out += '^';
            out += std::to_string(n->exponent);
            break;
        case NodeKind::Sqrt:
            out += "sqrt(";
            print_node(out, n->lhs, 0);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

} // namespace

std::string Expr::to_string() const {
    if (is_null()) return "<null>";
    std::string out;
    print_node(out, node_, 0);
    return out;
}

namespace {

int radical_depth_rec(const ExprNode* n,
                      std::unordered_map<const ExprNode*, int>& memo) {
    if (n == nullptr) return 0;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    int d = std::max(radical_depth_rec(n->lhs, memo), radical_depth_rec(n->rhs, memo));
    if (n->kind == NodeKind::Sqrt) d += 1;
    memo.emplace(n, d);
    return d;
}

void collect_radicals_rec(const ExprNode* n,
                          std::unordered_set<const ExprNode*>& seen,
                          std::vector<Expr>& out) {
    if (n == nullptr || seen.count(n)) return;
    seen.insert(n);
    collect_radicals_rec(n->lhs, seen, out);
    collect_radicals_rec(n->rhs, seen, out);
    // Post-order so that inner radicals are listed before the sqrt that
    // contains them; ties across siblings follow textual order.
    if (n->kind == NodeKind::Sqrt) out.push_back(ExprPool::wrap(n));
}

} // namespace

int Expr::radical_depth() const {
    std::unordered_map<const ExprNode*, int> memo;
    return radical_depth_rec(node_, memo);
}

void Expr::collect_radicals(std::vector<Expr>& out) const {
    std::unordered_set<const ExprNode*> seen;
    collect_radicals_rec(node_, seen, out);
}

std::string BranchAssignment::to_string() const {
    std::string s;
    s.reserve(signs_.size());
    for (auto v : signs_) s += (v >= 0 ? '+' : '-');
    return s;
}

RadicalTower RadicalTower::collect(std::span<const Expr> roots) {
    std::vector<Expr> order;
    {
        std::unordered_set<const ExprNode*> seen;
        for (const Expr& r : roots) {
            if (!r.is_null()) collect_radicals_rec(r.node(), seen, order);
        }
    }
    // Stable sort by nesting depth keeps first-occurrence order within a level.
    std::unordered_map<const ExprNode*, int> depth_memo;
    std::stable_sort(order.begin(), order.end(), [&](const Expr& a, const Expr& b) {
        return radical_depth_rec(a.node(), depth_memo) <
               radical_depth_rec(b.node(), depth_memo);
    });

    RadicalTower tower;
    tower.radicals_ = std::move(order);
    tower.inner_.resize(tower.radicals_.size());
    for (std::size_t i = 0; i < tower.radicals_.size(); ++i) {
        std::vector<Expr> sub;
        tower.radicals_[i].lhs().collect_radicals(sub);
        for (const Expr& s : sub) {
            int idx = tower.index_of(s.node());
            if (idx < 0 || static_cast<std::size_t>(idx) >= i)
                throw SurfaceError("radical tower is not well-ordered");
            tower.inner_[i].push_back(idx);
        }
        std::sort(tower.inner_[i].begin(), tower.inner_[i].end());
    }
    return tower;
}

int RadicalTower::index_of(const ExprNode* sqrt_node) const {
    for (std::size_t i = 0; i < radicals_.size(); ++i)
        if (radicals_[i].node() == sqrt_node) return static_cast<int>(i);
    return -1;
}

namespace {

Complex pow_int(Complex base, int e) {
    if (e == 0) return Complex(1.0, 0.0);
    bool inv = e < 0;
    unsigned n = inv ? static_cast<unsigned>(-static_cast<long long>(e))
                     : static_cast<unsigned>(e);
    Complex acc(1.0, 0.0);
    Complex b = base;
    while (n > 0) {
        if (n & 1u) acc *= b;
        b *= b;
        n >>= 1;
    }
    if (inv) {
        if (acc == Complex(0.0, 0.0))
            throw EvalError("division by zero in negative power");
        return Complex(1.0, 0.0) / acc;
    }
    return acc;
}

Complex eval_rec(const ExprNode* n, Complex k, const RadicalTower& tower,
                 const BranchAssignment& branches,
                 std::unordered_map<const ExprNode*, Complex>& memo) {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    Complex v;
    switch (n->kind) {
        case NodeKind::Variable: v = k; break;
        case NodeKind::Constant: v = n->value; break;
        case NodeKind::Add:
            v = eval_rec(n->lhs, k, tower, branches, memo) +
                eval_rec(n->rhs, k, tower, branches, memo);
            break;
        case NodeKind::Sub:
            v = eval_rec(n->lhs, k, tower, branches, memo) -
                eval_rec(n->rhs, k, tower, branches, memo);
            break;
        case NodeKind::Mul:
            v = eval_rec(n->lhs, k, tower, branches, memo) *
                eval_rec(n->rhs, k, tower, branches, memo);
            break;
        case NodeKind::Div: {
            Complex num = eval_rec(n->lhs, k, tower, branches, memo);
            Complex den = eval_rec(n->rhs, k, tower, branches, memo);
            if (den == Complex(0.0, 0.0)) {
                std::string expr;
                print_node(expr, n, 0);
                throw EvalError("division by zero in " + expr);
            }
            v = num / den;
            break;
        }
        case NodeKind::Negate:
            v = -eval_rec(n->lhs, k, tower, branches, memo);
            break;
        case NodeKind::Power: {
            Complex base = eval_rec(n->lhs, k, tower, branches, memo);
            if (n->exponent < 0 && base == Complex(0.0, 0.0)) {
                std::string expr;
                print_node(expr, n, 0);
                throw EvalError("division by zero in " + expr);
            }
            v = pow_int(base, n->exponent);
            break;
        }
        case NodeKind::Sqrt: {
            Complex radicand = eval_rec(n->lhs, k, tower, branches, memo);
            Complex principal = std::sqrt(radicand);
            int id = tower.index_of(n);
            if (id < 0) throw EvalError("radical not registered in the tower");
            if (static_cast<std::size_t>(id) >= branches.size())
                throw EvalError("branch assignment shorter than radical tower");
            v = (branches.sign(static_cast<std::size_t>(id)) >= 0) ? principal : -principal;
            break;
        }
    }
    memo.emplace(n, v);
    return v;
}

} // namespace

Complex evaluate(Expr e, Complex k, const RadicalTower& tower,
                 const BranchAssignment& branches) {
    if (e.is_null()) throw EvalError("null expression");
    std::unordered_map<const ExprNode*, Complex> memo;
    return eval_rec(e.node(), k, tower, branches, memo);
}

namespace {

std::pair<int, int> degree_bound_rec(const ExprNode* n,
                                     std::unordered_map<const ExprNode*, std::pair<int, int>>& memo) {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    std::pair<int, int> r{0, 0};
    auto cap = [](int x) { return std::min(x, 64); };
    switch (n->kind) {
        case NodeKind::Variable: r = {1, 0}; break;
        case NodeKind::Constant: r = {0, 0}; break;
        case NodeKind::Add:
        case NodeKind::Sub: {
            auto [na, da] = degree_bound_rec(n->lhs, memo);
            auto [nb, db] = degree_bound_rec(n->rhs, memo);
            r = {cap(std::max(na + db, nb + da)), cap(da + db)};
            break;
        }
        case NodeKind::Mul: {
            auto [na, da] = degree_bound_rec(n->lhs, memo);
            auto [nb, db] = degree_bound_rec(n->rhs, memo);
            r = {cap(na + nb), cap(da + db)};
            break;
        }
        case NodeKind::Div: {
            auto [na, da] = degree_bound_rec(n->lhs, memo);
            auto [nb, db] = degree_bound_rec(n->rhs, memo);
            r = {cap(na + db), cap(da + nb)};
            break;
        }
        case NodeKind::Negate: r = degree_bound_rec(n->lhs, memo); break;
        case NodeKind::Power: {
            auto [na, da] = degree_bound_rec(n->lhs, memo);
            int e = n->exponent;
            if (e >= 0) r = {cap(e * na), cap(e * da)};
            else r = {cap(-e * da), cap(-e * na)};
            break;
        }
        case NodeKind::Sqrt: {
            auto [na, da] = degree_bound_rec(n->lhs, memo);
            r = {(na + 1) / 2, (da + 1) / 2};
            break;
        }
    }
    memo.emplace(n, r);
    return r;
}

} // namespace

std::pair<int, int> degree_bound(Expr e) {
    std::unordered_map<const ExprNode*, std::pair<int, int>> memo;
    return degree_bound_rec(e.node(), memo);
}

} // namespace wh
