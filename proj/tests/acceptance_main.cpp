// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any criterion fails. Tolerances and runtime budgets are pinned here;
// see the README for how to run this binary.

#include "wh/classify.hpp"
#include "wh/continuation.hpp"
#include "wh/error.hpp"
#include "wh/parse.hpp"
#include "wh/problem.hpp"
#include "wh/report.hpp"
#include "wh/tracking.hpp"
#include "wh/words.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace wh;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& label, bool pass, double seconds,
            const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << criterion << ": " << label
              << "  [" << std::fixed << seconds << " s]";
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n" << std::defaultfloat;
    if (!pass) ++g_failures;
}

void run_criterion(int criterion, const std::string& label, double budget_seconds,
                   const std::function<std::string()>& body) {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    try {
        detail = body();
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - t0).count();
    if (pass && seconds > budget_seconds) {
        pass = false;
        detail += (detail.empty() ? "" : "; ") + std::string("runtime budget ") +
                  std::to_string(budget_seconds) + " s exceeded";
    }
    report(criterion, label, pass, seconds, detail);
}

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw CheckFailure(what);
}

std::string corpus(const std::string& name) {
    return std::string(WH_CORPUS_DIR) + "/" + name;
}

MatrixFunction matrix_from(const std::string& corpus_name) {
    return build_matrix(parse_problem_file(corpus(corpus_name)));
}

MatrixFunction example_3x3(Complex k0) {
    SymbolTable sym;
    sym.define("k0", k0);
    Expr s = parse_expression("sqrt(k0^2 - k^2)", sym);
    sym.define("s", s);
    std::vector<Expr> entries{
        parse_expression("k", sym),  parse_expression("2*k", sym),
        parse_expression("s", sym),  parse_expression("2*k", sym),
        parse_expression("k", sym),  parse_expression("-s", sym),
        parse_expression("-s", sym), parse_expression("s", sym),
        parse_expression("-k", sym)};
    return MatrixFunction(3, std::move(entries), 0.0, {s});
}

MatrixFunction nested_2x2(Complex k1, Complex k2) {
    SymbolTable sym;
    sym.define("k1", k1);
    sym.define("k2", k2);
    Expr s1 = parse_expression("sqrt(k1^2 - k^2)", sym);
    sym.define("s1", s1);
    Expr s2 = parse_expression("sqrt(k2^2 - s1)", sym);
    sym.define("s2", s2);
    std::vector<Expr> entries{parse_expression("s1", sym), parse_expression("s2", sym),
                              parse_expression("-s2", sym), parse_expression("k*s1", sym)};
    return MatrixFunction(2, std::move(entries), 0.0, {s1, s2});
}

// --------------------------------------------------------------------------

std::string criterion1_truncation() {
    const AffixOrders o{{2, 2}, {2, 2}};
    const Word w = parse_word("a1 a2 b1 b2", o);
    require(truncate(w, TruncationSide::Plus) == parse_word("b1 b2", o), "w^+ != b1 b2");
    require(truncate(w, TruncationSide::Minus) == w, "w^- != w");
    require(truncate(truncate(w, TruncationSide::Plus), TruncationSide::Minus).empty(),
            "w^{+-} != e");
    const Word v = parse_word("b1 b2 a1 a2", o);
    require(truncate(v, TruncationSide::Minus) == parse_word("a1 a2", o), "v^- != a1 a2");
    require(truncate(truncate(v, TruncationSide::Minus), TruncationSide::Plus).empty(),
            "v^{-+} != e");
    return "worked truncation values reproduced exactly";
}

std::string criterion2_branch_positive() {
    std::vector<Complex> k0s{Complex(1.0, 1.0)};
    std::mt19937_64 rng(4711);
    std::uniform_real_distribution<double> re(0.5, 2.0);
    std::uniform_real_distribution<double> im(0.4, 1.5);
    std::uniform_int_distribution<int> sign(0, 1);
    while (k0s.size() < 5)
        k0s.emplace_back((sign(rng) ? 1.0 : -1.0) * re(rng), im(rng));

    double worst = 0.0;
    for (const Complex& k0 : k0s) {
        MatrixFunction g = example_3x3(k0);
        ClassifyConfig cfg;
        cfg.seed = 42;
        const SheetAtlas atlas = build_atlas(g, cfg.surface);
        const CommutativityVerdict v = is_branch_commutative(g, atlas, cfg);
        require(v.samples == 16, "sample count is not 16");
        require(v.holds, "not branch-commutative at k0=" + std::to_string(k0.real()));
        worst = std::max(worst, v.residual);
    }
    require(worst < 1e-10, "residual " + std::to_string(worst) + " >= 1e-10");
    std::ostringstream os;
    os << "5 parameter sets, worst residual " << worst;
    return os.str();
}

std::string criterion3_reflection() {
    const Complex k0(1.0, 0.6), k1(0.35, 0.1), k2(0.8, -0.2);
    SymbolTable sym;
    sym.define("k0", k0);
    sym.define("k1", k1);
    sym.define("k2", k2);
    Expr s = parse_expression("sqrt(k0^2 - k^2)", sym);
    sym.define("s", s);
    std::vector<Expr> entries{
        parse_expression("1", sym), parse_expression("(k1 - s)/(k2 + s)", sym),
        parse_expression("(k2 - s)/(k1 + s)", sym), parse_expression("1", sym)};
    MatrixFunction g(2, std::move(entries), 0.0, {s});

    ClassifyConfig cfg;
    cfg.seed = 42;
    const SheetAtlas atlas = build_atlas(g, cfg.surface);
    require(atlas.sheet_count() == 2, "atlas does not have exactly 2 sheets");
    const CommutativityVerdict v = is_branch_commutative(g, atlas, cfg);
    require(v.holds, "not branch-commutative");

    const std::vector<Complex> affixes = eigenframe_branch_affixes(g, atlas, cfg);
    double worst = 0.0;
    for (const Complex expected : {std::sqrt(k0 * k0 - k1 * k1),
                                   -std::sqrt(k0 * k0 - k1 * k1),
                                   std::sqrt(k0 * k0 - k2 * k2),
                                   -std::sqrt(k0 * k0 - k2 * k2)}) {
        double best = std::numeric_limits<double>::infinity();
        for (const Complex& a : affixes) best = std::min(best, std::abs(a - expected));
        worst = std::max(worst, best);
    }
    require(worst < 1e-7, "eigenframe affix error " + std::to_string(worst) + " >= 1e-7");
    std::ostringstream os;
    os << "2 sheets, eigenframe affixes within " << worst;
    return os.str();
}

std::string criterion4_hurd_pipeline() {
    const std::vector<std::pair<Complex, Complex>> params{
        {Complex(5.0, 0.0), Complex(2.0, 0.0)},
        {Complex(1.5, 0.9), Complex(0.8, -0.4)},
        {Complex(2.0, 1.2), Complex(1.1, 0.3)}};
    double worst_bypass = 0.0, worst_sv = 0.0, worst_gs = 0.0;
    for (const auto& [k1, k2] : params) {
        MatrixFunction g = nested_2x2(k1, k2);
        ClassifyConfig cfg;
        cfg.seed = 42;
        cfg.symmetrizer_probe_ones = true;
        const SheetAtlas atlas = build_atlas(g, cfg.surface);
        require(atlas.sheet_count() == 4, "atlas does not have 4 sheets");
        require(basic_bypass_words(atlas).size() == 3, "not 3 basic bypass matrices");

        const CommutativityVerdict branch = is_branch_commutative(g, atlas, cfg);
        require(!branch.holds, "branch commutativity unexpectedly holds");
        require(branch.witness.has_value(), "no witness for the branch failure");

        const CommutativityVerdict bypass = is_bypass_commutative(g, atlas, cfg);
        require(bypass.holds, "bypass commutativity fails");
        require(bypass.residual < 1e-8, "bypass residual >= 1e-8");
        worst_bypass = std::max(worst_bypass, bypass.residual);

        const SymmetrizerResult s = build_symmetrizer(g, atlas, cfg, &bypass);
        require(s.probe.ones, "probe is not the constant one");
        require(s.single_valued_residual < 1e-7, "S not single-valued at 1e-7");
        require(s.gs_branch_residual < 1e-7, "G*S not branch-commutative at 1e-7");
        worst_sv = std::max(worst_sv, s.single_valued_residual);
        worst_gs = std::max(worst_gs, s.gs_branch_residual);
    }
    std::ostringstream os;
    os << "3 parameter sets; bypass<=" << worst_bypass << " single-valued<=" << worst_sv
       << " GS-commutator<=" << worst_gs;
    return os.str();
}

std::string criterion5_balance_controls() {
    {
        MatrixFunction g = matrix_from("balanced_control.wh");
        const SheetAtlas atlas = build_atlas(g);
        require(is_balanced(atlas).balanced, "nested scalar tower not balanced");
    }
    {
        MatrixFunction g = matrix_from("unbalanced_control.wh");
        const SheetAtlas atlas = build_atlas(g);
        const BalanceVerdict v = is_balanced(atlas);
        require(!v.balanced, "split-affix scalar unexpectedly balanced");
        require(v.witness_sheet >= 0, "no witness sheet");
        require(v.failing_side.has_value(), "no failing side");
    }
    return "balanced and unbalanced controls classified with witnesses";
}

std::string criterion6_ansatz_roundtrip() {
    const std::vector<std::string> names{"example_3x3.wh", "daniele.wh", "rational.wh",
                                         "khrapkov.wh", "scalar_sqrt.wh"};
    double worst_rt = 0.0, worst_sv = 0.0;
    for (const std::string& name : names) {
        MatrixFunction g = matrix_from(name);
        ClassifyConfig cfg = build_config(parse_problem_file(corpus(name)));
        cfg.holdout_samples = 10;
        const SheetAtlas atlas = build_atlas(g, cfg.surface);
        const AnsatzResult ansatz = build_ansatz(g, atlas, cfg);
        require(ansatz.roundtrip_residual < 1e-6,
                name + ": round trip residual >= 1e-6");
        require(ansatz.a_single_valued_residual < 1e-7,
                name + ": reconstructed A not single-valued at 1e-7");
        worst_rt = std::max(worst_rt, ansatz.roundtrip_residual);
        worst_sv = std::max(worst_sv, ansatz.a_single_valued_residual);
    }
    std::ostringstream os;
    os << names.size() << " matrices; roundtrip<=" << worst_rt << " A-single-valued<="
       << worst_sv;
    return os.str();
}

std::string criterion7_cocycle() {
    MatrixFunction g = matrix_from("daniele.wh");
    const SheetAtlas atlas = build_atlas(g);
    const AffixOrders o = atlas.orders();

    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> len(0, 6);
    std::uniform_int_distribution<int> hemi(0, 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto random_word = [&] {
        std::vector<Letter> letters;
        const int n = len(rng);
        for (int i = 0; i < n; ++i)
            letters.push_back({hemi(rng) ? Hemisphere::Upper : Hemisphere::Lower, 0, 1});
        return Word::from_letters(letters, o);
    };

    double worst = 0.0;
    int done = 0;
    int guard = 0;
    while (done < 100 && guard < 2000) {
        ++guard;
        const Word w = random_word();
        const Word v = random_word();
        const Complex k(2.3 * unit(rng), 2.3 * unit(rng));
        try {
            const Eigen::MatrixXcd whole = bypass_matrix(g, compose(w, v, o), k, atlas);
            const Eigen::MatrixXcd parts =
                bypass_matrix_shifted(g, w, v, k, atlas) * bypass_matrix(g, v, k, atlas);
            const double res = (whole - parts).norm() / std::max(1.0, whole.norm());
            worst = std::max(worst, res);
            ++done;
        } catch (const NumericError&) {
            continue;  // singular factor or near-cut sample; draw again
        }
    }
    require(done == 100, "fewer than 100 word pairs checked");
    require(worst < 1e-7, "cocycle residual " + std::to_string(worst) + " >= 1e-7");
    std::ostringstream os;
    os << "100 word pairs, worst residual " << worst;
    return os.str();
}

std::string criterion8_monodromy_oracle() {
    const std::vector<std::string> names{"example_3x3.wh", "daniele.wh", "khrapkov.wh",
                                         "scalar_sqrt.wh", "unbalanced_control.wh"};
    int compared = 0;
    for (const std::string& name : names) {
        MatrixFunction g = matrix_from(name);
        const SheetAtlas atlas = build_atlas(g);
        for (std::size_t r = 0; r < g.tower().size(); ++r)
            require(g.tower().inner_radicals(r).empty(),
                    name + " is not an unnested tower");

        for (int l = 0; l < atlas.letter_count(); ++l) {
            // Independent oracle: a loop about the affix flips exactly the
            // radicals whose radicand vanishes there.
            std::vector<int> oracle_image(atlas.sheets.size());
            for (int s = 0; s < atlas.sheet_count(); ++s) {
                BranchAssignment flipped = atlas.sheets[static_cast<std::size_t>(s)];
                for (int rid : atlas.affix(l).radicals)
                    flipped = flipped.flipped(static_cast<std::size_t>(rid));
                const int target = atlas.find_sheet(flipped);
                require(target >= 0, name + ": flipped assignment is not a sheet");
                oracle_image[static_cast<std::size_t>(s)] = target;
            }
            const SheetPermutation oracle(oracle_image);
            for (double factor : {0.15, 0.25, 0.4}) {
                require(monodromy_permutation(g, atlas, l, factor) == oracle,
                        name + ": tracked monodromy differs from the sign-flip rule");
                ++compared;
            }
        }
    }
    return std::to_string(compared) + " (letter, radius) permutations match the oracle";
}

std::string criterion9_determinism() {
    for (const char* name : {"example_3x3.wh", "nested_hurd.wh", "daniele.wh"}) {
        const ProblemSpec spec = parse_problem_file(corpus(name));
        const RunResult a = run_classification(spec);
        const RunResult b = run_classification(spec);
        require(a.exit_code == 0 && b.exit_code == 0, std::string(name) + ": run failed");
        const std::string ja = a.report.dump(2);
        const std::string jb = b.report.dump(2);
        require(ja == jb, std::string(name) + ": reports differ between runs");
    }
    return "byte-identical reports across reruns for 3 corpus problems";
}

} // namespace

int main() {
    std::cout << "acceptance suite (" << kToolName << " " << kToolVersion << ")\n";

    run_criterion(1, "truncation operator conformance", 0.001, criterion1_truncation);
    run_criterion(2, "branch-commutative positive control", 1.0, criterion2_branch_positive);
    run_criterion(3, "reflection matrix: sheets and eigenframe affixes", 2.0,
                  criterion3_reflection);
    run_criterion(4, "bypass pipeline with rational symmetrizer", 10.0,
                  criterion4_hurd_pipeline);
    run_criterion(5, "balanced and unbalanced controls", 2.0, criterion5_balance_controls);
    run_criterion(6, "rational-frame round trip on the corpus", 30.0,
                  criterion6_ansatz_roundtrip);
    run_criterion(7, "bypass-matrix cocycle property", 10.0, criterion7_cocycle);
    run_criterion(8, "monodromy matches the sign-flip oracle", 10.0,
                  criterion8_monodromy_oracle);
    run_criterion(9, "deterministic reports", 30.0, criterion9_determinism);

    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}
