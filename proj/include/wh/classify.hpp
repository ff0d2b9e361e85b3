#pragma once

#include "wh/continuation.hpp"
#include "wh/matrix_function.hpp"
#include "wh/ratrecon.hpp"
#include "wh/surface.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wh {

struct ClassifyConfig {
    double tol = 1e-8;              // commutativity verdict tolerance (relative)
    int samples = 16;
    std::uint64_t seed = 12345;
    double clearance_factor = 0.1;  // times geometric scale, for sampling
    ReconConfig recon;
    int holdout_samples = 10;
    double single_valued_tol = 1e-7;
    double invariance_tol = 1e-7;
    double frame_gap_rel = 1e-8;
    double vandermonde_cond_max = 1e10;
    bool symmetrizer_probe_ones = true;  // f == 1; otherwise seeded random
    SurfaceConfig surface;
};

struct CommutatorWitness {
    int lhs_index = -1;  // sheet index or basic-matrix index
    int rhs_index = -1;
    Complex k{};
    double residual = 0.0;
};

struct CommutativityVerdict {
    bool holds = false;
    double residual = 0.0;
    double tolerance = 0.0;
    int samples = 0;
    std::optional<CommutatorWitness> witness;  // present iff !holds
};

// A matrix family indexed by sheet, sampled at points of the k-plane.
using MatrixFamily = std::function<Eigen::MatrixXcd(int sheet, Complex k)>;

// Draws sample affixes uniformly from an annulus around the affix
// geometry, rejecting points within clearance of affixes or cuts.
class SampleDrawer {
public:
    SampleDrawer(const SheetAtlas& atlas, std::uint64_t seed, double clearance_factor);
    Complex draw();

private:
    const SheetAtlas& atlas_;
    std::mt19937_64 rng_;
    double clearance_;
    double r_lo_, r_hi_;
};

CommutativityVerdict is_branch_commutative(const MatrixFunction& g, const SheetAtlas& atlas,
                                           const ClassifyConfig& cfg);
CommutativityVerdict branch_commutativity_of_family(const MatrixFamily& family,
                                                    int sheet_count, const SheetAtlas& atlas,
                                                    const ClassifyConfig& cfg);

// Pairwise commutativity of the basic bypass matrices; requires a
// balanced surface.
CommutativityVerdict is_bypass_commutative(const MatrixFunction& g, const SheetAtlas& atlas,
                                           const ClassifyConfig& cfg);

struct FrameOptions {
    int normalization_row = 0;
    double gap_rel = 1e-8;
    // With a fallback, a column whose normalization-row entry vanishes is
    // scaled by its largest entry instead (reported in the frame); without
    // one such a column is an error.
    bool allow_pivot_fallback = true;
};

// Right-eigenvector frame with the normalization row scaled to ones and
// columns in canonical order (eigenvalues sorted by real, then imaginary
// part). Throws NumericError on near-degenerate eigenvalues or a vanishing
// normalization entry without a fallback (callers resample).
struct EigenFrame {
    Eigen::MatrixXcd m;
    Eigen::VectorXcd eigenvalues;
    Complex k{};
    int sheet = 0;
    int fallback_columns = 0;  // columns not normalizable on the chosen row
};

EigenFrame eigen_frame(const Eigen::MatrixXcd& value, Complex k, int sheet,
                       const FrameOptions& opt = {});
EigenFrame eigen_frame(const MatrixFunction& g, Complex k, const Word& w,
                       const SheetAtlas& atlas, const FrameOptions& opt = {});

// Branch points of the eigenvector frame, detected from the discriminant
// of the all-sheets characteristic polynomial and confirmed by an
// eigenvalue-collision test on some sheet.
std::vector<Complex> eigenframe_branch_affixes(const MatrixFunction& g,
                                               const SheetAtlas& atlas,
                                               const ClassifyConfig& cfg);

struct ProbeFunction {
    bool ones = false;           // constant probe: leading 1, no matrix term
    std::uint64_t seed = 0;
    std::vector<Complex> beta;   // values actually used, recorded for the report
};

struct AlgebraicCoefficient {
    bool rational = false;
    RationalFunction fn;  // valid when rational
    std::vector<std::pair<Complex, Complex>> samples;
    double residual = 0.0;  // reconstruction residual when rational
};

struct AnsatzResult {
    std::vector<std::vector<RationalFunction>> a;  // N x N rational entries
    double a_recon_residual = 0.0;                 // max over entries
    double a_invariance_residual = 0.0;            // across sheets
    double a_single_valued_residual = 0.0;
    std::vector<AlgebraicCoefficient> g;           // g_0 .. g_{N-1}
    double roundtrip_residual = 0.0;               // held-out reproduction of G
    ProbeFunction probe;
};

// Constructs the rational similarity frame and the coefficient functions
// through eigenframe sampling; requires branch commutativity.
AnsatzResult build_ansatz(const MatrixFunction& g, const SheetAtlas& atlas,
                          const ClassifyConfig& cfg,
                          const CommutativityVerdict* branch_verdict = nullptr);

struct SymmetrizerResult {
    std::vector<std::vector<RationalFunction>> s;  // N x N rational entries
    double recon_residual = 0.0;
    double single_valued_residual = 0.0;
    double gs_branch_residual = 0.0;  // branch commutativity of G*S
    double min_abs_det = 0.0;         // over the determinant probe samples
    ProbeFunction probe;
    std::vector<Word> sheet_words;    // lower-letter words listing the sheets; last is e
};

// Sheet sum of f * G^{-1}; requires a balanced, bypass-commutative
// surface. With the ones probe f == 1.
SymmetrizerResult build_symmetrizer(const MatrixFunction& g, const SheetAtlas& atlas,
                                    const ClassifyConfig& cfg,
                                    const CommutativityVerdict* bypass_verdict = nullptr);

enum class Classification {
    BranchCommutative,   // commutatively factorizable
    BypassCommutative,   // rationally reducible to branch-commutative
    NotCommutative,
    Unbalanced,
};

std::string classification_name(Classification c);
std::string classification_summary(Classification c);

struct ClassificationOutcome {
    Classification verdict;
    SheetAtlas atlas;
    BalanceVerdict balance;
    std::optional<CommutativityVerdict> branch;
    std::optional<CommutativityVerdict> bypass;
    std::optional<AnsatzResult> ansatz;
    std::optional<SymmetrizerResult> symmetrizer;
    std::vector<Complex> eigenframe_affixes;
};

// Full pipeline: atlas, balance, branch commutativity, then either the
// rational frame construction or the bypass route with the symmetrizer.
ClassificationOutcome classify(const MatrixFunction& g, const ClassifyConfig& cfg = {});

} // namespace wh
