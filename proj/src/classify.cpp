#include "wh/classify.hpp"

#include "wh/error.hpp"
#include "wh/tracking.hpp"

#include <algorithm>
#include <cmath>

namespace wh {

// ---------------------------------------------------------------------------
// Sampling

SampleDrawer::SampleDrawer(const SheetAtlas& atlas, std::uint64_t seed,
                           double clearance_factor)
    : atlas_(atlas), rng_(seed) {
    const double scale = atlas.geometry.scale;
    clearance_ = clearance_factor * scale;
    r_lo_ = 0.35 * scale;
    r_hi_ = 2.3 * scale;
}

Complex SampleDrawer::draw() {
    std::uniform_real_distribution<double> radius(r_lo_, r_hi_);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    for (int attempt = 0; attempt < 500; ++attempt) {
        const double r = radius(rng_);
        const double t = angle(rng_);
        const Complex z = r * Complex(std::cos(t), std::sin(t));
        if (atlas_.geometry.min_affix_distance(z) < clearance_) continue;
        if (atlas_.geometry.min_cut_distance(z) < clearance_) continue;
        return z;
    }
    throw NumericError("could not draw a sample affix clear of affixes and cuts");
}

namespace {

double commutator_residual(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return ((a * b - b * a).norm()) / (na * nb);
}

} // namespace

// ---------------------------------------------------------------------------
// Commutativity checks

CommutativityVerdict branch_commutativity_of_family(const MatrixFamily& family,
                                                    int sheet_count,
                                                    const SheetAtlas& atlas,
                                                    const ClassifyConfig& cfg) {
    CommutativityVerdict verdict;
    verdict.tolerance = cfg.tol;
    verdict.samples = cfg.samples;
    SampleDrawer drawer(atlas, cfg.seed, cfg.clearance_factor);

    for (int s = 0; s < cfg.samples; ++s) {
        std::vector<Eigen::MatrixXcd> values(static_cast<std::size_t>(sheet_count));
        Complex k{};
        bool have = false;
        for (int attempt = 0; attempt < 32 && !have; ++attempt) {
            k = drawer.draw();
            try {
                for (int sheet = 0; sheet < sheet_count; ++sheet)
                    values[static_cast<std::size_t>(sheet)] = family(sheet, k);
                have = true;
            } catch (const NumericError&) {
                continue;  // near a cut or a singular point; redraw
            }
        }
        if (!have)
            throw NumericError("could not evaluate the sheet family at any sample affix");

        for (int i = 0; i < sheet_count; ++i) {
            for (int j = i + 1; j < sheet_count; ++j) {
                const double r = commutator_residual(values[static_cast<std::size_t>(i)],
                                                     values[static_cast<std::size_t>(j)]);
                if (r > verdict.residual) {
                    verdict.residual = r;
                    if (r >= cfg.tol)
                        verdict.witness = CommutatorWitness{i, j, k, r};
                }
            }
        }
    }
    verdict.holds = verdict.residual < cfg.tol;
    if (verdict.holds) verdict.witness.reset();
    return verdict;
}

CommutativityVerdict is_branch_commutative(const MatrixFunction& g, const SheetAtlas& atlas,
                                           const ClassifyConfig& cfg) {
    MatrixFamily family = [&](int sheet, Complex k) {
        return value_on_sheet_index(g, k, sheet, atlas);
    };
    return branch_commutativity_of_family(family, atlas.sheet_count(), atlas, cfg);
}

CommutativityVerdict is_bypass_commutative(const MatrixFunction& g, const SheetAtlas& atlas,
                                           const ClassifyConfig& cfg) {
    const BalanceVerdict balance = is_balanced(atlas);
    if (!balance.balanced)
        throw PreconditionError("bypass commutativity requires a balanced surface");

    CommutativityVerdict verdict;
    verdict.tolerance = cfg.tol;
    verdict.samples = cfg.samples;
    SampleDrawer drawer(atlas, cfg.seed + 1, cfg.clearance_factor);

    for (int s = 0; s < cfg.samples; ++s) {
        std::vector<Eigen::MatrixXcd> basics;
        Complex k{};
        bool have = false;
        for (int attempt = 0; attempt < 32 && !have; ++attempt) {
            k = drawer.draw();
            try {
                basics = basic_bypass_matrices(g, atlas, k);
                have = true;
            } catch (const NumericError&) {
                continue;
            }
        }
        if (!have) throw NumericError("could not evaluate basic bypass matrices");

        for (std::size_t i = 0; i < basics.size(); ++i) {
            for (std::size_t j = i + 1; j < basics.size(); ++j) {
                const double r = commutator_residual(basics[i], basics[j]);
                if (r > verdict.residual) {
                    verdict.residual = r;
                    if (r >= cfg.tol)
                        verdict.witness = CommutatorWitness{static_cast<int>(i),
                                                            static_cast<int>(j), k, r};
                }
            }
        }
    }
    verdict.holds = verdict.residual < cfg.tol;
    if (verdict.holds) verdict.witness.reset();
    return verdict;
}

// ---------------------------------------------------------------------------
// Eigenframe

EigenFrame eigen_frame(const Eigen::MatrixXcd& value, Complex k, int sheet,
                       const FrameOptions& opt) {
    const int n = static_cast<int>(value.rows());
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(value, true);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigendecomposition failed at the sample affix");

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    const auto& ev = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (ev(a).real() != ev(b).real()) return ev(a).real() < ev(b).real();
        return ev(a).imag() < ev(b).imag();
    });

    EigenFrame frame;
    frame.k = k;
    frame.sheet = sheet;
    frame.eigenvalues.resize(n);
    frame.m.resize(n, n);

    double spectral_scale = 0.0;
    for (int i = 0; i < n; ++i) spectral_scale = std::max(spectral_scale, std::abs(ev(i)));
    spectral_scale = std::max(spectral_scale, 1e-300);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (std::abs(ev(order[static_cast<std::size_t>(i)]) -
                         ev(order[static_cast<std::size_t>(j)])) <
                opt.gap_rel * spectral_scale)
                throw NumericError(
                    "near-degenerate eigenvalues at the sample affix; resample");
        }
    }

    for (int c = 0; c < n; ++c) {
        const int src = order[static_cast<std::size_t>(c)];
        frame.eigenvalues(c) = ev(src);
        Eigen::VectorXcd col = solver.eigenvectors().col(src);
        Complex pivot = col(opt.normalization_row);
        if (std::abs(pivot) < 1e-12 * col.norm()) {
            if (!opt.allow_pivot_fallback)
                throw NumericError(
                    "eigenvector has a vanishing entry in the normalization row " +
                    std::to_string(opt.normalization_row) +
                    "; resample or configure a different row");
            int best = 0;
            for (int r = 1; r < n; ++r)
                if (std::abs(col(r)) > std::abs(col(best))) best = r;
            pivot = col(best);
            ++frame.fallback_columns;
        }
        frame.m.col(c) = col / pivot;
    }
    return frame;
}

EigenFrame eigen_frame(const MatrixFunction& g, Complex k, const Word& w,
                       const SheetAtlas& atlas, const FrameOptions& opt) {
    const int sheet = atlas.apply_word(w, 0);
    return eigen_frame(value_on_sheet_index(g, k, sheet, atlas), k, sheet, opt);
}

// ---------------------------------------------------------------------------
// Eigenframe branch affixes

namespace {

// Eigenvalues of G on every sheet at k, concatenated.
std::vector<Complex> all_sheet_eigenvalues(const MatrixFunction& g, const SheetAtlas& atlas,
                                           Complex k) {
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(atlas.sheet_count()) * g.dim());
    for (int s = 0; s < atlas.sheet_count(); ++s) {
        const Eigen::MatrixXcd v = value_on_sheet_index(g, k, s, atlas);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(v, false);
        if (solver.info() != Eigen::Success)
            throw NumericError("eigendecomposition failed");
        for (int i = 0; i < g.dim(); ++i) out.push_back(solver.eigenvalues()(i));
    }
    return out;
}

// The same-sheet eigenvalue pair with the smallest gap at k.
struct CollidingPair {
    int sheet = -1;
    Complex la{}, lb{};
    double rel_gap = std::numeric_limits<double>::infinity();
};

CollidingPair closest_pair(const MatrixFunction& g, const SheetAtlas& atlas, Complex k) {
    CollidingPair best;
    for (int s = 0; s < atlas.sheet_count(); ++s) {
        const Eigen::MatrixXcd v = value_on_sheet_index(g, k, s, atlas);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(v, false);
        if (solver.info() != Eigen::Success) continue;
        double scale = 1e-300;
        for (int i = 0; i < g.dim(); ++i)
            scale = std::max(scale, std::abs(solver.eigenvalues()(i)));
        scale = std::max(scale, 1.0);
        for (int i = 0; i < g.dim(); ++i) {
            for (int j = i + 1; j < g.dim(); ++j) {
                const double gap =
                    std::abs(solver.eigenvalues()(i) - solver.eigenvalues()(j)) / scale;
                if (gap < best.rel_gap) {
                    best = CollidingPair{s, solver.eigenvalues()(i),
                                         solver.eigenvalues()(j), gap};
                }
            }
        }
    }
    return best;
}

// (lambda_a - lambda_b)^2 for the continuation of a reference pair on its
// sheet: analytic near a square-root collision, with a simple zero exactly
// at the branch point, hence a clean Newton target.
Complex pair_gap_squared(const MatrixFunction& g, const SheetAtlas& atlas, Complex k,
                         const CollidingPair& ref) {
    const Eigen::MatrixXcd v = value_on_sheet_index(g, k, ref.sheet, atlas);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(v, false);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigendecomposition failed");
    int ia = 0;
    for (int i = 1; i < g.dim(); ++i)
        if (std::abs(solver.eigenvalues()(i) - ref.la) <
            std::abs(solver.eigenvalues()(ia) - ref.la))
            ia = i;
    int ib = -1;
    for (int i = 0; i < g.dim(); ++i) {
        if (i == ia) continue;
        if (ib < 0 || std::abs(solver.eigenvalues()(i) - ref.lb) <
                          std::abs(solver.eigenvalues()(ib) - ref.lb))
            ib = i;
    }
    const Complex d = solver.eigenvalues()(ia) - solver.eigenvalues()(ib);
    return d * d;
}

// Newton iteration on the squared pair gap; returns the refined collision
// point, or nothing when the candidate does not converge to one.
std::optional<Complex> polish_collision(const MatrixFunction& g, const SheetAtlas& atlas,
                                        Complex z0, double scale) {
    Complex z = z0;
    CollidingPair ref;
    try {
        ref = closest_pair(g, atlas, z);
    } catch (const NumericError&) {
        return std::nullopt;
    }
    if (ref.sheet < 0) return std::nullopt;

    for (int iter = 0; iter < 16; ++iter) {
        const double delta = 1e-6 * std::max(1.0, std::abs(z));
        Complex h, hp;
        bool ok = false;
        for (const Complex dir : {Complex(1.0, 0.0), Complex(0.0, 1.0),
                                  Complex(M_SQRT1_2, M_SQRT1_2)}) {
            try {
                h = pair_gap_squared(g, atlas, z, ref);
                const Complex h1 = pair_gap_squared(g, atlas, z + delta * dir, ref);
                const Complex h2 = pair_gap_squared(g, atlas, z - delta * dir, ref);
                hp = (h1 - h2) / (2.0 * delta * dir);
                ok = true;
                break;
            } catch (const NumericError&) {
                continue;  // stepped onto a cut; try another direction
            }
        }
        if (!ok || std::abs(hp) < 1e-300) return std::nullopt;
        const Complex step = h / hp;
        z -= step;
        if (std::abs(z - z0) > 0.5 * std::max(1.0, scale)) return std::nullopt;
        if (std::abs(step) < 1e-13 * std::max(1.0, std::abs(z))) break;
        // Re-anchor the tracked pair once the iterate has moved.
        try {
            const CollidingPair cur = closest_pair(g, atlas, z);
            if (cur.sheet >= 0) ref = cur;
        } catch (const NumericError&) {
        }
    }

    try {
        const CollidingPair final_pair = closest_pair(g, atlas, z);
        if (final_pair.rel_gap < 1e-5) return z;
    } catch (const NumericError&) {
    }
    return std::nullopt;
}

} // namespace

std::vector<Complex> eigenframe_branch_affixes(const MatrixFunction& g,
                                               const SheetAtlas& atlas,
                                               const ClassifyConfig& cfg) {
    if (g.dim() < 2) return {};

    // The discriminant aggregates every sheet's characteristic polynomial,
    // so its degrees run well past the per-entry caps.
    ReconConfig disc_recon = cfg.recon;
    disc_recon.max_num_degree = 2 * (cfg.recon.max_num_degree + cfg.recon.max_den_degree);
    disc_recon.max_den_degree = disc_recon.max_num_degree;
    const int caps = disc_recon.max_num_degree + disc_recon.max_den_degree;
    const int wanted = std::max(4 * caps + 12, 48);

    // Two concentric circles keep the high-degree fit well conditioned; a
    // wide annulus would blow up the Vandermonde columns.
    const double scale = atlas.geometry.scale;
    std::vector<std::pair<Complex, Complex>> samples;
    samples.reserve(static_cast<std::size_t>(wanted));
    int produced = 0;
    for (int i = 0; i < 2 * wanted && produced < wanted; ++i) {
        const double r = (i % 2 == 0) ? 1.21 * scale : 1.73 * scale;
        const double theta = 2.0 * M_PI * (i * 0.6180339887498949 + 0.05);
        const Complex k = r * Complex(std::cos(theta), std::sin(theta));
        try {
            const std::vector<Complex> roots = all_sheet_eigenvalues(g, atlas, k);
            Complex disc(1.0, 0.0);
            for (std::size_t a = 0; a < roots.size(); ++a)
                for (std::size_t b = a + 1; b < roots.size(); ++b) {
                    const Complex d = roots[a] - roots[b];
                    disc *= d * d;
                }
            if (std::isfinite(disc.real()) && std::isfinite(disc.imag()) &&
                std::abs(disc) < 1e150) {
                samples.emplace_back(k, disc);
                ++produced;
            }
        } catch (const NumericError&) {
            continue;
        }
    }
    if (produced < wanted / 2)
        throw NumericError("too few usable samples for the eigenframe affix search");

    ReconstructionResult rec;
    try {
        rec = reconstruct_rational(samples, disc_recon);
    } catch (const ReconstructionError&) {
        return {};  // discriminant not rational within caps: report nothing
    }

    // Zeros and poles of the discriminant both mark eigenvalue collisions;
    // multiple roots make the raw companion roots cluster coarsely, so each
    // candidate is refined by Newton on the colliding pair and spurious
    // cross-sheet collisions drop out when no same-sheet pair closes.
    std::vector<Complex> candidates = polynomial_roots(rec.fn.num);
    const std::vector<Complex> den_roots = polynomial_roots(rec.fn.den);
    candidates.insert(candidates.end(), den_roots.begin(), den_roots.end());

    std::vector<Complex> out;
    for (const Complex& z : candidates) {
        const std::optional<Complex> polished =
            polish_collision(g, atlas, z, atlas.geometry.scale);
        if (!polished) continue;
        bool dup = false;
        for (const Complex& w : out)
            if (std::abs(*polished - w) < 1e-7 * std::max(1.0, std::abs(w))) dup = true;
        if (!dup) out.push_back(*polished);
    }
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

// ---------------------------------------------------------------------------
// Rational frame construction

namespace {

std::vector<Complex> draw_beta(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Complex> beta(n);
    for (auto& b : beta) {
        const double re = unit(rng);
        const double im = unit(rng);
        b = Complex(re, im);
    }
    return beta;
}

Eigen::VectorXcd probe_values(const std::vector<Complex>& beta, const Eigen::MatrixXcd& m) {
    const int n = static_cast<int>(m.cols());
    Eigen::VectorXcd f(n);
    for (int c = 0; c < n; ++c) {
        Complex acc(0.0, 0.0);
        for (int r = 0; r < n; ++r) acc += beta[static_cast<std::size_t>(r)] * m(r, c);
        f(c) = acc;
    }
    return f;
}

bool values_distinct(const Eigen::VectorXcd& f, double rel) {
    double scale = 1e-300;
    for (int i = 0; i < f.size(); ++i) scale = std::max(scale, std::abs(f(i)));
    for (int i = 0; i < f.size(); ++i)
        for (int j = i + 1; j < f.size(); ++j)
            if (std::abs(f(i) - f(j)) < rel * scale) return false;
    return true;
}

// Solves the power-basis system lambda_n = sum_m g_m f_n^m by least
// squares; returns false when the system is too ill-conditioned.
bool solve_power_system(const Eigen::VectorXcd& f, const Eigen::VectorXcd& lambda,
                        double cond_max, Eigen::VectorXcd& out) {
    const int n = static_cast<int>(f.size());
    Eigen::MatrixXcd v(n, n);
    for (int r = 0; r < n; ++r) {
        Complex p(1.0, 0.0);
        for (int c = 0; c < n; ++c) {
            v(r, c) = p;
            p *= f(r);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0.0 || smax / smin > cond_max) return false;
    out = svd.solve(lambda);
    return true;
}

struct FrameSample {
    Complex k;
    EigenFrame frame;
    Eigen::VectorXcd f;
    Eigen::MatrixXcd a;
    Eigen::VectorXcd g_coeff;
};

} // namespace

AnsatzResult build_ansatz(const MatrixFunction& g, const SheetAtlas& atlas,
                          const ClassifyConfig& cfg,
                          const CommutativityVerdict* branch_verdict) {
    CommutativityVerdict local;
    if (branch_verdict == nullptr) {
        local = is_branch_commutative(g, atlas, cfg);
        branch_verdict = &local;
    }
    if (!branch_verdict->holds)
        throw PreconditionError(
            "the rational frame construction requires branch commutativity");

    const int n = g.dim();
    std::mt19937_64 beta_rng(cfg.seed + 101);
    const int caps = cfg.recon.max_num_degree + cfg.recon.max_den_degree;
    const int train_count = std::max(4 * caps + 8, 24);

    AnsatzResult result;
    FrameOptions fopt;
    fopt.gap_rel = cfg.frame_gap_rel;

    std::vector<FrameSample> train;
    std::vector<Complex> beta;

    for (int redraw = 0; redraw < 5; ++redraw) {
        beta = draw_beta(beta_rng, static_cast<std::size_t>(n));
        train.clear();
        SampleDrawer drawer(atlas, cfg.seed + 202, cfg.clearance_factor);
        bool collision = false;
        int guard = 0;
        while (static_cast<int>(train.size()) < train_count && guard < 20 * train_count) {
            ++guard;
            const Complex k = drawer.draw();
            FrameSample fs;
            fs.k = k;
            try {
                fs.frame = eigen_frame(g, k, Word(), atlas, fopt);
            } catch (const NumericError&) {
                continue;
            }
            fs.f = probe_values(beta, fs.frame.m);
            if (!values_distinct(fs.f, 1e-6)) {
                collision = true;
                break;
            }
            if (!solve_power_system(fs.f, fs.frame.eigenvalues, cfg.vandermonde_cond_max,
                                    fs.g_coeff))
                continue;  // ill-conditioned sample; discard and redraw
            fs.a = fs.frame.m * fs.f.asDiagonal() * fs.frame.m.inverse();
            train.push_back(std::move(fs));
        }
        if (collision) continue;
        if (static_cast<int>(train.size()) < train_count)
            throw NumericError("could not gather enough regular frame samples");
        break;
    }
    if (static_cast<int>(train.size()) < train_count)
        throw NumericError(
            "probe selection failed: coefficient collisions after 5 redraws");

    result.probe.ones = false;
    result.probe.seed = cfg.seed + 101;
    result.probe.beta = beta;

    // Invariance of the frame combination across sheets.
    for (int probe = 0; probe < std::min<int>(3, static_cast<int>(train.size())); ++probe) {
        const FrameSample& fs = train[static_cast<std::size_t>(probe)];
        for (int sheet = 1; sheet < atlas.sheet_count(); ++sheet) {
            EigenFrame other;
            try {
                other = eigen_frame(value_on_sheet_index(g, fs.k, sheet, atlas), fs.k,
                                    sheet, fopt);
            } catch (const NumericError&) {
                continue;
            }
            const Eigen::VectorXcd f2 = probe_values(beta, other.m);
            const Eigen::MatrixXcd a2 = other.m * f2.asDiagonal() * other.m.inverse();
            const double res = (a2 - fs.a).norm() / std::max(fs.a.norm(), 1e-300);
            result.a_invariance_residual = std::max(result.a_invariance_residual, res);
        }
    }
    if (result.a_invariance_residual >= cfg.invariance_tol)
        throw NumericError("frame combination is not invariant across sheets; residual " +
                           std::to_string(result.a_invariance_residual));

    // Entrywise rational reconstruction of the invariant combination.
    result.a.assign(static_cast<std::size_t>(n),
                    std::vector<RationalFunction>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::vector<std::pair<Complex, Complex>> samples;
            samples.reserve(train.size());
            for (const FrameSample& fs : train) samples.emplace_back(fs.k, fs.a(i, j));
            ReconstructionResult rec = reconstruct_rational(samples, cfg.recon);
            result.a_recon_residual = std::max(result.a_recon_residual, rec.residual);
            result.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                std::move(rec.fn);
        }
    }

    // Coefficient functions: reconstructed when rational, sampled otherwise.
    result.g.resize(static_cast<std::size_t>(n));
    for (int m = 0; m < n; ++m) {
        AlgebraicCoefficient& coeff = result.g[static_cast<std::size_t>(m)];
        for (const FrameSample& fs : train) coeff.samples.emplace_back(fs.k, fs.g_coeff(m));
        try {
            ReconstructionResult rec = reconstruct_rational(coeff.samples, cfg.recon);
            coeff.rational = true;
            coeff.fn = std::move(rec.fn);
            coeff.residual = rec.residual;
        } catch (const ReconstructionError&) {
            coeff.rational = false;  // algebraic, per-sample values stand
        }
    }

    // Held-out round trip through the reconstructed entries.
    auto eval_a = [&](Complex k) {
        Eigen::MatrixXcd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                a(i, j) =
                    result.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].eval(k);
        return a;
    };

    SampleDrawer held_drawer(atlas, cfg.seed + 303, cfg.clearance_factor);
    int held_done = 0;
    int held_guard = 0;
    while (held_done < cfg.holdout_samples && held_guard < 40 * cfg.holdout_samples) {
        ++held_guard;
        const Complex k = held_drawer.draw();
        EigenFrame frame;
        try {
            frame = eigen_frame(g, k, Word(), atlas, fopt);
        } catch (const NumericError&) {
            continue;
        }
        const Eigen::VectorXcd f = probe_values(beta, frame.m);
        Eigen::VectorXcd coeffs;
        bool coeffs_ok = true;
        // Use reconstructed closed forms when every coefficient has one;
        // fall back to the per-sample solve otherwise.
        bool all_rational = true;
        for (const auto& c : result.g) all_rational = all_rational && c.rational;
        if (all_rational) {
            coeffs.resize(n);
            for (int m = 0; m < n; ++m)
                coeffs(m) = result.g[static_cast<std::size_t>(m)].fn.eval(k);
        } else {
            coeffs_ok =
                solve_power_system(f, frame.eigenvalues, cfg.vandermonde_cond_max, coeffs);
        }
        if (!coeffs_ok) continue;

        const Eigen::MatrixXcd a = eval_a(k);
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
        Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
        for (int m = 0; m < n; ++m) {
            acc += coeffs(m) * power;
            power = power * a;
        }
        const Eigen::MatrixXcd direct = value_on_sheet_index(g, k, 0, atlas);
        const double res = (acc - direct).norm() / std::max(direct.norm(), 1e-300);
        result.roundtrip_residual = std::max(result.roundtrip_residual, res);
        ++held_done;
    }
    if (held_done < cfg.holdout_samples)
        throw NumericError("could not evaluate enough held-out samples");
    if (result.roundtrip_residual >= 1e-6)
        throw NumericError("rational frame round trip exceeded tolerance: residual " +
                           std::to_string(result.roundtrip_residual));

    // Single-valuedness of the reconstructed entries under continuation.
    SheetEvaluator a_eval = [&](Complex k, const BranchAssignment&) { return eval_a(k); };
    const SingleValuedVerdict sv =
        verify_single_valued(a_eval, g, atlas, cfg.single_valued_tol);
    result.a_single_valued_residual = sv.residual;

    return result;
}

// ---------------------------------------------------------------------------
// Symmetrizer

namespace {

Complex probe_scalar(const ProbeFunction& probe, const Eigen::MatrixXcd& g_inv) {
    if (probe.ones) return Complex(1.0, 0.0);
    const int n = static_cast<int>(g_inv.rows());
    Complex acc = probe.beta[0];
    std::size_t idx = 1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += probe.beta[idx++] * g_inv(i, j);
    return acc;
}

} // namespace

SymmetrizerResult build_symmetrizer(const MatrixFunction& g, const SheetAtlas& atlas,
                                    const ClassifyConfig& cfg,
                                    const CommutativityVerdict* bypass_verdict) {
    CommutativityVerdict local;
    if (bypass_verdict == nullptr) {
        local = is_bypass_commutative(g, atlas, cfg);
        bypass_verdict = &local;
    }
    if (!bypass_verdict->holds)
        throw PreconditionError("the symmetrizer requires bypass commutativity");

    const int n = g.dim();
    const int sheet_count = atlas.sheet_count();
    SymmetrizerResult result;
    result.sheet_words = basic_bypass_words(atlas);
    result.sheet_words.push_back(Word());  // the physical sheet closes the list

    std::mt19937_64 beta_rng(cfg.seed + 404);

    // All-sheet assignments at k, transported from the anchor.
    auto assignments_at = [&](Complex k) {
        std::vector<BranchAssignment> out;
        out.reserve(static_cast<std::size_t>(sheet_count));
        const PathSpec path = plan_transport(atlas.geometry, atlas.geometry.anchor, k);
        for (int s = 0; s < sheet_count; ++s)
            out.push_back(
                track_tower(g.tower(), path, atlas.sheets[static_cast<std::size_t>(s)])
                    .assignment);
        return out;
    };

    auto sum_at = [&](const ProbeFunction& probe, Complex k,
                      const std::vector<BranchAssignment>& sheet_assignments) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
        for (const BranchAssignment& sigma : sheet_assignments) {
            const Eigen::MatrixXcd value = g.evaluate(k, sigma);
            const double scale =
                std::max(value.norm() / std::sqrt(static_cast<double>(n)), 1e-300);
            if (std::abs(value.determinant()) < 1e-12 * std::pow(scale, n))
                throw NumericError("singular sheet value; resample");
            const Eigen::MatrixXcd inv = value.inverse();
            acc += probe_scalar(probe, inv) * inv;
        }
        return acc;
    };

    const int caps = cfg.recon.max_num_degree + cfg.recon.max_den_degree;
    const int train_count = std::max(4 * caps + 8, 24);

    for (int redraw = 0; redraw < 5; ++redraw) {
        ProbeFunction probe;
        probe.ones = cfg.symmetrizer_probe_ones;
        probe.seed = cfg.seed + 404;
        if (probe.ones) {
            probe.beta = {Complex(1.0, 0.0)};
        } else {
            probe.beta = draw_beta(beta_rng, 1 + static_cast<std::size_t>(n) * n);
        }

        // Gather samples of the sheet sum.
        SampleDrawer drawer(atlas, cfg.seed + 505, cfg.clearance_factor);
        std::vector<std::pair<Complex, Eigen::MatrixXcd>> values;
        int guard = 0;
        while (static_cast<int>(values.size()) < train_count && guard < 20 * train_count) {
            ++guard;
            const Complex k = drawer.draw();
            try {
                values.emplace_back(k, sum_at(probe, k, assignments_at(k)));
            } catch (const NumericError&) {
                continue;
            }
        }
        if (static_cast<int>(values.size()) < train_count)
            throw NumericError("could not gather enough symmetrizer samples");

        // Determinant degeneracy probe on the first few samples.
        double min_det = std::numeric_limits<double>::infinity();
        for (int i = 0; i < std::min<int>(5, static_cast<int>(values.size())); ++i) {
            const Eigen::MatrixXcd& s = values[static_cast<std::size_t>(i)].second;
            const double scale =
                std::max(s.norm() / std::sqrt(static_cast<double>(n)), 1e-300);
            min_det = std::min(min_det, std::abs(s.determinant()) / std::pow(scale, n));
        }
        result.min_abs_det = min_det;
        if (min_det < 1e-10) {
            if (probe.ones)
                throw NumericError(
                    "symmetrizer determinant vanishes with the constant probe; "
                    "rerun with a random probe");
            continue;  // degenerate probe; redraw
        }
        result.probe = probe;

        // Entrywise rational reconstruction.
        result.s.assign(static_cast<std::size_t>(n),
                        std::vector<RationalFunction>(static_cast<std::size_t>(n)));
        result.recon_residual = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                std::vector<std::pair<Complex, Complex>> samples;
                samples.reserve(values.size());
                for (const auto& [k, s] : values) samples.emplace_back(k, s(i, j));
                ReconstructionResult rec = reconstruct_rational(samples, cfg.recon);
                result.recon_residual = std::max(result.recon_residual, rec.residual);
                result.s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    std::move(rec.fn);
            }
        }

        // Single-valuedness of the sheet sum: the incoming assignment must
        // be one of the transported sheet assignments (a discrete
        // consistency check between two tracking routes), and the sum over
        // the whole set is then compared before and after the loop.
        SheetEvaluator s_eval = [&](Complex k, const BranchAssignment& sigma) {
            const std::vector<BranchAssignment> sheet_assignments = assignments_at(k);
            if (std::find(sheet_assignments.begin(), sheet_assignments.end(), sigma) ==
                sheet_assignments.end())
                throw NumericError(
                    "assignment reached by the loop is not one of the sheet "
                    "assignments; atlas inconsistency");
            return sum_at(result.probe, k, sheet_assignments);
        };
        const SingleValuedVerdict sv =
            verify_single_valued(s_eval, g, atlas, cfg.single_valued_tol);
        result.single_valued_residual = sv.residual;
        if (!sv.holds)
            throw NumericError("symmetrizer sheet sum failed the single-valuedness check");

        // Branch commutativity of G * S through the reconstructed entries.
        auto eval_s = [&](Complex k) {
            Eigen::MatrixXcd s(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    s(i, j) = result.s[static_cast<std::size_t>(i)]
                                      [static_cast<std::size_t>(j)]
                                          .eval(k);
            return s;
        };
        // Explicit return type: the product must be materialized before the
        // operand temporaries die.
        MatrixFamily gs_family = [&](int sheet, Complex k) -> Eigen::MatrixXcd {
            return value_on_sheet_index(g, k, sheet, atlas) * eval_s(k);
        };
        ClassifyConfig gs_cfg = cfg;
        gs_cfg.tol = cfg.single_valued_tol;
        gs_cfg.seed = cfg.seed + 606;
        const CommutativityVerdict gs =
            branch_commutativity_of_family(gs_family, sheet_count, atlas, gs_cfg);
        result.gs_branch_residual = gs.residual;
        if (!gs.holds)
            throw NumericError(
                "G*S is not branch-commutative at tolerance; symmetrizer rejected");
        return result;
    }
    throw NumericError("symmetrizer probe degenerate after 5 redraws");
}

// ---------------------------------------------------------------------------
// Pipeline

std::string classification_name(Classification c) {
    switch (c) {
        case Classification::BranchCommutative: return "branch_commutative";
        case Classification::BypassCommutative: return "bypass_commutative";
        case Classification::NotCommutative: return "not_commutative";
        case Classification::Unbalanced: return "unbalanced";
    }
    return "unknown";
}

std::string classification_summary(Classification c) {
    switch (c) {
        case Classification::BranchCommutative:
            return "commutatively factorizable (branch-commutative)";
        case Classification::BypassCommutative:
            return "rationally reducible to branch-commutative (bypass-commutative)";
        case Classification::NotCommutative:
            return "not commutatively factorizable by the implemented criteria";
        case Classification::Unbalanced:
            return "criteria inapplicable (unbalanced surface)";
    }
    return "unknown";
}

ClassificationOutcome classify(const MatrixFunction& g, const ClassifyConfig& cfg) {
    g.check_determinant_not_identically_zero(cfg.seed);

    ClassificationOutcome outcome{Classification::NotCommutative,
                                  build_atlas(g, cfg.surface),
                                  {},
                                  std::nullopt,
                                  std::nullopt,
                                  std::nullopt,
                                  std::nullopt,
                                  {}};
    outcome.balance = is_balanced(outcome.atlas);
    if (!outcome.balance.balanced) {
        outcome.verdict = Classification::Unbalanced;
        return outcome;
    }

    outcome.eigenframe_affixes = eigenframe_branch_affixes(g, outcome.atlas, cfg);

    outcome.branch = is_branch_commutative(g, outcome.atlas, cfg);
    if (outcome.branch->holds) {
        outcome.verdict = Classification::BranchCommutative;
        outcome.ansatz = build_ansatz(g, outcome.atlas, cfg, &*outcome.branch);
        return outcome;
    }

    outcome.bypass = is_bypass_commutative(g, outcome.atlas, cfg);
    if (outcome.bypass->holds) {
        outcome.verdict = Classification::BypassCommutative;
        outcome.symmetrizer = build_symmetrizer(g, outcome.atlas, cfg, &*outcome.bypass);
        return outcome;
    }

    outcome.verdict = Classification::NotCommutative;
    return outcome;
}

} // namespace wh
