#pragma once

#include "wh/expr.hpp"

#include <Eigen/Dense>

#include <vector>

namespace wh {

// A square matrix of expressions over k sharing one radical tower, plus
// the real anchor point at which the all-(+1) assignment defines the
// physical sheet.
class MatrixFunction {
public:
    // `tower_seed` lists expressions whose radicals should come first in
    // the canonical tower order (named radical definitions, in input
    // order); entries follow in row-major order.
    MatrixFunction(int dim, std::vector<Expr> entries_row_major,
                   double anchor = 0.0, std::vector<Expr> tower_seed = {});

    int dim() const { return dim_; }
    Expr entry(int i, int j) const { return entries_[static_cast<std::size_t>(i) * dim_ + j]; }
    const std::vector<Expr>& entries() const { return entries_; }

    const RadicalTower& tower() const { return tower_; }
    double anchor() const { return anchor_; }
    Complex anchor_point() const { return Complex(anchor_, 0.0); }

    // Largest constant magnitude appearing in the entries, floored at 1;
    // used as a coarse geometric scale before any affixes are known.
    double coefficient_scale() const { return coefficient_scale_; }

    // Entrywise evaluation; eval failures are rethrown with the entry
    // coordinates attached.
    Eigen::MatrixXcd evaluate(Complex k, const BranchAssignment& branches) const;

    // Checks det G is not identically zero by sampling; throws
    // SurfaceError if every probe determinant vanishes.
    void check_determinant_not_identically_zero(std::uint64_t seed = 7) const;

private:
    int dim_;
    std::vector<Expr> entries_;
    RadicalTower tower_;
    double anchor_;
    double coefficient_scale_;
};

} // namespace wh
