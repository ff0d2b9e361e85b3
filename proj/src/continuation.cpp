#include "wh/continuation.hpp"

#include "wh/error.hpp"
#include "wh/tracking.hpp"

#include <cmath>
#include <deque>

namespace wh {

BranchAssignment assignment_at(const MatrixFunction& g, const SheetAtlas& atlas,
                               int sheet, Complex k) {
    const PathSpec path = plan_transport(atlas.geometry, atlas.geometry.anchor, k);
    return track_tower(g.tower(), path, atlas.sheets[static_cast<std::size_t>(sheet)])
        .assignment;
}

Eigen::MatrixXcd value_on_sheet_index(const MatrixFunction& g, Complex k, int sheet,
                                      const SheetAtlas& atlas) {
    return g.evaluate(k, assignment_at(g, atlas, sheet, k));
}

Eigen::MatrixXcd value_on_sheet(const MatrixFunction& g, Complex k, const Word& w,
                                const SheetAtlas& atlas) {
    return value_on_sheet_index(g, k, atlas.apply_word(w, 0), atlas);
}

ContinuationChain qplus_chain(const Word& w) {
    ContinuationChain chain;
    chain.side = ChainSide::QPlusRight;
    Word cur = w;
    for (;;) {
        const Word p = truncate(cur, TruncationSide::Plus);
        if (p.empty()) break;  // regular across upper affixes: no factor needed
        const Word pm = truncate(p, TruncationSide::Minus);
        chain.factors.push_back({p, false});
        chain.factors.push_back({pm, true});
        cur = pm;
    }
    return chain;
}

ContinuationChain qminus_chain(const Word& w) {
    ContinuationChain chain;
    chain.side = ChainSide::QMinusLeft;
    // Collected shallow-to-deep, emitted deep-to-shallow so the list reads
    // in left-to-right product order.
    std::vector<ChainFactor> reversed;
    Word cur = w;
    for (;;) {
        const Word m = truncate(cur, TruncationSide::Minus);
        if (m.empty()) break;
        const Word mp = truncate(m, TruncationSide::Plus);
        reversed.push_back({m, false});
        reversed.push_back({mp, true});
        cur = mp;
    }
    chain.factors.assign(reversed.rbegin(), reversed.rend());
    return chain;
}

namespace {

Eigen::MatrixXcd checked_inverse(const Eigen::MatrixXcd& m, const Word& w) {
    const int n = static_cast<int>(m.rows());
    const double scale = std::max(m.norm() / std::sqrt(static_cast<double>(n)), 1e-300);
    const double det = std::abs(m.determinant());
    if (det < 1e-12 * std::pow(scale, n))
        throw NumericError("singular chain factor at sheet {" + w.to_string() +
                           "}; resample the evaluation point");
    return m.inverse();
}

} // namespace

Eigen::MatrixXcd bypass_matrix_shifted(const MatrixFunction& g, const Word& w,
                                       const Word& shift, Complex k,
                                       const SheetAtlas& atlas) {
    const ContinuationChain chain = qplus_chain(w);
    const AffixOrders orders = atlas.orders();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(g.dim(), g.dim());
    for (const ChainFactor& f : chain.factors) {
        const Word word = shift.empty() ? f.word : compose(f.word, shift, orders);
        Eigen::MatrixXcd value = value_on_sheet(g, k, word, atlas);
        if (f.inverted) value = checked_inverse(value, word);
        acc = acc * value;
    }
    return acc;
}

Eigen::MatrixXcd bypass_matrix(const MatrixFunction& g, const Word& w, Complex k,
                               const SheetAtlas& atlas) {
    return bypass_matrix_shifted(g, w, Word(), k, atlas);
}

std::vector<Word> basic_bypass_words(const SheetAtlas& atlas) {
    const BalanceVerdict balance = is_balanced(atlas);
    if (!balance.balanced)
        throw PreconditionError(
            "basic bypass set undefined: the surface is not balanced (sheet " +
            std::to_string(balance.witness_sheet) + " unreachable from one side)");

    // BFS over lower letters only; every sheet is reachable since the
    // surface is balanced.
    const AffixOrders orders = atlas.orders();
    std::vector<Word> words(atlas.sheets.size());
    std::vector<bool> discovered(atlas.sheets.size(), false);
    discovered[0] = true;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        for (int l = atlas.upper_count(); l < atlas.letter_count(); ++l) {
            const int t = atlas.letter_perm[static_cast<std::size_t>(l)].apply(s);
            if (discovered[static_cast<std::size_t>(t)]) continue;
            discovered[static_cast<std::size_t>(t)] = true;
            const int idx = l - atlas.upper_count();
            words[static_cast<std::size_t>(t)] =
                compose(words[static_cast<std::size_t>(s)],
                        Word::letter(Hemisphere::Lower, idx, 1, orders), orders);
            queue.push_back(t);
        }
    }

    std::vector<Word> out;
    out.reserve(words.size() - 1);
    for (std::size_t s = 1; s < words.size(); ++s) out.push_back(words[s]);
    return out;
}

std::vector<Eigen::MatrixXcd> basic_bypass_matrices(const MatrixFunction& g,
                                                    const SheetAtlas& atlas, Complex k) {
    const std::vector<Word> words = basic_bypass_words(atlas);
    const Eigen::MatrixXcd base = value_on_sheet_index(g, k, 0, atlas);
    const Eigen::MatrixXcd base_inv = checked_inverse(base, Word());
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(words.size());
    for (const Word& w : words) out.push_back(value_on_sheet(g, k, w, atlas) * base_inv);
    return out;
}

} // namespace wh
