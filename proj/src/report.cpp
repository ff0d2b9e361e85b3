#include "wh/report.hpp"

#include "wh/error.hpp"

#include <cstdint>

namespace wh {

using nlohmann::ordered_json;

std::string content_hash(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

ordered_json complex_json(Complex c) { return ordered_json::array({c.real(), c.imag()}); }

ordered_json rational_json(const RationalFunction& fn) {
    ordered_json num = ordered_json::array();
    for (const Complex& c : fn.num) num.push_back(complex_json(c));
    ordered_json den = ordered_json::array();
    for (const Complex& c : fn.den) den.push_back(complex_json(c));
    return ordered_json{{"num", num}, {"den", den}};
}

ordered_json verdict_json(const CommutativityVerdict& v) {
    ordered_json j{{"holds", v.holds},
                   {"residual", v.residual},
                   {"tolerance", v.tolerance},
                   {"samples", v.samples}};
    if (v.witness) {
        j["witness"] = ordered_json{{"lhs", v.witness->lhs_index},
                                    {"rhs", v.witness->rhs_index},
                                    {"k", complex_json(v.witness->k)},
                                    {"residual", v.witness->residual}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

ordered_json atlas_json(const SheetAtlas& atlas) {
    ordered_json affixes = ordered_json::array();
    for (int l = 0; l < atlas.letter_count(); ++l) {
        const BranchAffix& bp = atlas.affix(l);
        ordered_json radicals = ordered_json::array();
        for (int r : bp.radicals) radicals.push_back(r);
        affixes.push_back(ordered_json{
            {"letter", atlas.letter_name(l)},
            {"affix", complex_json(bp.affix)},
            {"hemisphere", bp.hemisphere == Hemisphere::Upper ? "upper" : "lower"},
            {"order", bp.order},
            {"radicals", radicals},
            {"near_real_axis", bp.near_real_axis}});
    }
    ordered_json sheets = ordered_json::array();
    for (int s = 0; s < atlas.sheet_count(); ++s) {
        sheets.push_back(ordered_json{
            {"index", s},
            {"word", atlas.representatives[static_cast<std::size_t>(s)].to_string()},
            {"assignment", atlas.sheets[static_cast<std::size_t>(s)].to_string()}});
    }
    ordered_json monodromy = ordered_json::object();
    for (int l = 0; l < atlas.letter_count(); ++l) {
        ordered_json image = ordered_json::array();
        for (int v : atlas.letter_perm[static_cast<std::size_t>(l)].image()) image.push_back(v);
        monodromy[atlas.letter_name(l)] = image;
    }
    return ordered_json{{"branch_affixes", affixes},
                        {"sheet_count", atlas.sheet_count()},
                        {"physical_sheet", 0},
                        {"sheets", sheets},
                        {"monodromy", monodromy}};
}

ordered_json probe_json(const ProbeFunction& probe) {
    ordered_json beta = ordered_json::array();
    for (const Complex& b : probe.beta) beta.push_back(complex_json(b));
    return ordered_json{
        {"kind", probe.ones ? "ones" : "random"}, {"seed", probe.seed}, {"beta", beta}};
}

ordered_json matrix_of_rationals_json(const std::vector<std::vector<RationalFunction>>& m) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : m) {
        ordered_json r = ordered_json::array();
        for (const auto& fn : row) r.push_back(rational_json(fn));
        rows.push_back(r);
    }
    return rows;
}

ordered_json ansatz_json(const AnsatzResult& a) {
    ordered_json g = ordered_json::array();
    for (const auto& coeff : a.g) {
        ordered_json cj{{"rational", coeff.rational}};
        if (coeff.rational) {
            cj["fn"] = rational_json(coeff.fn);
            cj["residual"] = coeff.residual;
        } else {
            ordered_json samples = ordered_json::array();
            for (const auto& [k, v] : coeff.samples)
                samples.push_back(ordered_json::array({complex_json(k), complex_json(v)}));
            cj["kind"] = "algebraic, per-sample";
            cj["samples"] = samples;
        }
        g.push_back(cj);
    }
    return ordered_json{{"a", matrix_of_rationals_json(a.a)},
                        {"a_recon_residual", a.a_recon_residual},
                        {"a_invariance_residual", a.a_invariance_residual},
                        {"a_single_valued_residual", a.a_single_valued_residual},
                        {"g", g},
                        {"roundtrip_residual", a.roundtrip_residual},
                        {"probe", probe_json(a.probe)}};
}

ordered_json symmetrizer_json(const SymmetrizerResult& s) {
    ordered_json words = ordered_json::array();
    for (const Word& w : s.sheet_words) words.push_back(w.to_string());
    return ordered_json{{"s", matrix_of_rationals_json(s.s)},
                        {"recon_residual", s.recon_residual},
                        {"single_valued_residual", s.single_valued_residual},
                        {"gs_branch_commutative_residual", s.gs_branch_residual},
                        {"min_abs_det", s.min_abs_det},
                        {"sheet_words", words},
                        {"probe", probe_json(s.probe)}};
}

ordered_json header_json(const ProblemSpec& spec) {
    return ordered_json{{"format_version", kReportFormatVersion},
                        {"tool", ordered_json{{"name", kToolName}, {"version", kToolVersion}}},
                        {"input", ordered_json{{"path", spec.path},
                                               {"content_hash", content_hash(spec.source_text)},
                                               {"echo", spec.source_text}}}};
}

ordered_json options_json(const ProblemSpec& spec, const ClassifyConfig& cfg) {
    return ordered_json{
        {"anchor", anchor_from(spec)},
        {"tol", cfg.tol},
        {"samples", cfg.samples},
        {"seed", cfg.seed},
        {"max_degree",
         ordered_json::array({cfg.recon.max_num_degree, cfg.recon.max_den_degree})},
        {"probe", cfg.symmetrizer_probe_ones ? "ones" : "random"}};
}

} // namespace

ordered_json report_json(const ProblemSpec& spec, const ClassifyConfig& cfg,
                         const ClassificationOutcome& outcome) {
    ordered_json j = header_json(spec);
    j["options"] = options_json(spec, cfg);
    j["atlas"] = atlas_json(outcome.atlas);

    ordered_json balance{{"verdict", outcome.balance.balanced}};
    if (!outcome.balance.balanced) {
        balance["witness"] = ordered_json{
            {"sheet", outcome.balance.witness_sheet},
            {"unreachable_from",
             outcome.balance.failing_side == Hemisphere::Upper ? "upper" : "lower"}};
    } else {
        balance["witness"] = nullptr;
    }
    j["balanced"] = balance;

    j["branch_commutative"] =
        outcome.branch ? verdict_json(*outcome.branch) : ordered_json(nullptr);
    j["bypass_commutative"] =
        outcome.bypass ? verdict_json(*outcome.bypass) : ordered_json(nullptr);

    ordered_json em = ordered_json::array();
    for (const Complex& z : outcome.eigenframe_affixes) em.push_back(complex_json(z));
    j["eigenframe_branch_affixes"] = em;

    j["ansatz"] = outcome.ansatz ? ansatz_json(*outcome.ansatz) : ordered_json(nullptr);
    j["symmetrizer"] =
        outcome.symmetrizer ? symmetrizer_json(*outcome.symmetrizer) : ordered_json(nullptr);

    j["classification"] = classification_name(outcome.verdict);
    j["summary"] = classification_summary(outcome.verdict);
    j["errors"] = ordered_json::array();
    return j;
}

ordered_json error_report_json(const ProblemSpec& spec, const std::string& kind,
                               const std::string& message) {
    ordered_json j = header_json(spec);
    j["classification"] = nullptr;
    j["summary"] = "classification failed";
    j["errors"] = ordered_json::array({ordered_json{{"kind", kind}, {"message", message}}});
    return j;
}

RunResult run_classification(const ProblemSpec& spec) {
    RunResult result;
    const ClassifyConfig cfg = build_config(spec);  // throws InputError on bad options
    MatrixFunction g = build_matrix(spec);
    try {
        const ClassificationOutcome outcome = classify(g, cfg);
        result.report = report_json(spec, cfg, outcome);
        result.diagram_text = render_text_diagram(outcome.atlas);
        result.diagram_dot = render_dot_diagram(outcome.atlas);
        result.exit_code = 0;
    } catch (const NumericError& e) {
        result.report = error_report_json(spec, "numeric_failure", e.what());
        result.exit_code = 3;
    }
    return result;
}

} // namespace wh
