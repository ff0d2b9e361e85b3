#pragma once

#include "wh/expr.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace wh {

struct SheetAtlas;
class MatrixFunction;

// p(k)/q(k) with complex coefficients in ascending degree; q is monic
// and shares no root with p within clustering tolerance.
struct RationalFunction {
    std::vector<Complex> num;
    std::vector<Complex> den;  // monic; {1} for polynomials

    Complex eval(Complex k) const;
    int num_degree() const { return static_cast<int>(num.size()) - 1; }
    int den_degree() const { return static_cast<int>(den.size()) - 1; }
};

struct ReconConfig {
    int max_num_degree = 12;
    int max_den_degree = 12;
    double accept_tol = 1e-8;  // relative residual on held-out samples
};

struct ReconstructionResult {
    RationalFunction fn;
    double residual;  // max relative held-out error
};

// Least-squares fit of the linearized interpolation system
// p(k_i) - v_i q(k_i) = 0 over increasing total degree; accepts the
// smallest degree pair whose relative residual on the reserved 25% of
// samples is below accept_tol. Throws ReconstructionError otherwise.
ReconstructionResult reconstruct_rational(
    std::span<const std::pair<Complex, Complex>> samples,
    const ReconConfig& cfg = {});

// Roots of a complex polynomial (ascending coefficients) via the
// companion-matrix eigenvalues; leading near-zero coefficients are
// trimmed relative to the largest one.
std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs_ascending);

Complex eval_poly(std::span<const Complex> coeffs_ascending, Complex k);

// A matrix-valued function sampled through the surface machinery:
// callers supply the evaluation point and the branch assignment valid at
// that point.
using SheetEvaluator =
    std::function<Eigen::MatrixXcd(Complex k, const BranchAssignment& at_k)>;

struct SingleValuedVerdict {
    bool holds = false;
    double residual = 0.0;
    double tolerance = 0.0;
};

// Compares fn before and after carrying the argument once around every
// affix (3 base points each): single-valued functions must return the
// same value even though the branch assignment changes.
SingleValuedVerdict verify_single_valued(const SheetEvaluator& fn,
                                         const MatrixFunction& g,
                                         const SheetAtlas& atlas, double tol);

} // namespace wh
