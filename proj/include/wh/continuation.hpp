#pragma once

#include "wh/matrix_function.hpp"
#include "wh/surface.hpp"
#include "wh/words.hpp"

#include <Eigen/Dense>

#include <vector>

namespace wh {

// Branch assignment valid at k for the given sheet, transported from the
// anchor along a cut-avoiding path.
BranchAssignment assignment_at(const MatrixFunction& g, const SheetAtlas& atlas,
                               int sheet, Complex k);

// Value of G at affix k on the sheet reached by bypass word w from the
// physical sheet.
Eigen::MatrixXcd value_on_sheet(const MatrixFunction& g, Complex k, const Word& w,
                                const SheetAtlas& atlas);
Eigen::MatrixXcd value_on_sheet_index(const MatrixFunction& g, Complex k, int sheet,
                                      const SheetAtlas& atlas);

struct ChainFactor {
    Word word;
    bool inverted;
};

// Which side the residual symbolic factor attaches to after unrolling:
// the plus chain leaves Q+{e} on the right, the minus chain leaves Q-{e}
// on the left. Factors are stored in left-to-right product order.
enum class ChainSide { QPlusRight, QMinusLeft };

struct ContinuationChain {
    ChainSide side;
    std::vector<ChainFactor> factors;
};

// Unrolls the recursive continuation identities down to the identity
// word. A word whose plus-truncation is already empty produces an empty
// chain (the factor is regular across upper affixes), mirrored for the
// minus chain.
ContinuationChain qplus_chain(const Word& w);
ContinuationChain qminus_chain(const Word& w);

// Product of the plus-chain factors evaluated at k; the identity for the
// empty chain. Throws NumericError when an inverted factor is singular
// at k (callers resample).
Eigen::MatrixXcd bypass_matrix(const MatrixFunction& g, const Word& w, Complex k,
                               const SheetAtlas& atlas);

// Same product with every factor word right-composed with `shift`,
// i.e. the bypass matrix carried along the bypass `shift`.
Eigen::MatrixXcd bypass_matrix_shifted(const MatrixFunction& g, const Word& w,
                                       const Word& shift, Complex k,
                                       const SheetAtlas& atlas);

// Per non-physical sheet, the BFS-shortest lower-letter word reaching it
// (ties broken lexicographically). Requires a balanced surface.
std::vector<Word> basic_bypass_words(const SheetAtlas& atlas);

// The sheet_count-1 matrices G{w_j} G^{-1}{e} evaluated at k.
std::vector<Eigen::MatrixXcd> basic_bypass_matrices(const MatrixFunction& g,
                                                    const SheetAtlas& atlas, Complex k);

} // namespace wh
