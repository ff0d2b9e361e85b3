#include "wh/matrix_function.hpp"

#include "wh/error.hpp"

#include <cmath>
#include <random>
#include <unordered_set>

namespace wh {

namespace {

double max_constant_magnitude(const ExprNode* n,
                              std::unordered_set<const ExprNode*>& seen) {
    if (n == nullptr || seen.count(n)) return 0.0;
    seen.insert(n);
    double m = 0.0;
    if (n->kind == NodeKind::Constant) m = std::abs(n->value);
    m = std::max(m, max_constant_magnitude(n->lhs, seen));
    m = std::max(m, max_constant_magnitude(n->rhs, seen));
    return m;
}

} // namespace

MatrixFunction::MatrixFunction(int dim, std::vector<Expr> entries_row_major,
                               double anchor, std::vector<Expr> tower_seed)
    : dim_(dim), entries_(std::move(entries_row_major)), anchor_(anchor) {
    if (dim_ < 1) throw InputError("matrix dimension must be at least 1");
    if (entries_.size() != static_cast<std::size_t>(dim_) * dim_)
        throw InputError("matrix entry count does not match dimension");
    for (const Expr& e : entries_)
        if (e.is_null()) throw InputError("null matrix entry");

    std::vector<Expr> roots = std::move(tower_seed);
    roots.insert(roots.end(), entries_.begin(), entries_.end());
    tower_ = RadicalTower::collect(roots);

    std::unordered_set<const ExprNode*> seen;
    double m = 0.0;
    for (const Expr& e : entries_)
        m = std::max(m, max_constant_magnitude(e.node(), seen));
    coefficient_scale_ = std::max(1.0, m);
}

Eigen::MatrixXcd MatrixFunction::evaluate(Complex k, const BranchAssignment& branches) const {
    Eigen::MatrixXcd out(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
        for (int j = 0; j < dim_; ++j) {
            try {
                out(i, j) = wh::evaluate(entry(i, j), k, tower_, branches);
            } catch (const EvalError& e) {
                throw EvalError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                "): " + e.what());
            }
        }
    }
    return out;
}

void MatrixFunction::check_determinant_not_identically_zero(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double s = coefficient_scale_;
    const BranchAssignment physical = BranchAssignment::all_plus(tower_.size());
    int evaluated = 0;
    for (int attempt = 0; attempt < 12 && evaluated < 3; ++attempt) {
        Complex k(unit(rng) * 1.7 * s, unit(rng) * 1.3 * s);
        try {
            Eigen::MatrixXcd g = evaluate(k, physical);
            ++evaluated;
            double scale = std::max(1e-300, g.norm());
            double det = std::abs(g.determinant());
            if (det > 1e-12 * std::pow(scale, dim_)) return;
        } catch (const EvalError&) {
            continue;  // pole hit; try another point
        }
    }
    throw SurfaceError("determinant of the matrix appears to vanish identically");
}

} // namespace wh
