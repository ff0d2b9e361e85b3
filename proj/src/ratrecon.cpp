#include "wh/ratrecon.hpp"

#include "wh/error.hpp"
#include "wh/surface.hpp"

#include <algorithm>
#include <cmath>

namespace wh {

Complex eval_poly(std::span<const Complex> coeffs, Complex k) {
    Complex acc(0.0, 0.0);
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * k + *it;
    return acc;
}

Complex RationalFunction::eval(Complex k) const {
    return eval_poly(num, k) / eval_poly(den, k);
}

std::vector<Complex> polynomial_roots(std::span<const Complex> coeffs_ascending) {
    std::vector<Complex> c(coeffs_ascending.begin(), coeffs_ascending.end());
    double cmax = 0.0;
    for (const Complex& x : c) cmax = std::max(cmax, std::abs(x));
    if (cmax == 0.0) return {};
    while (!c.empty() && std::abs(c.back()) < 1e-12 * cmax) c.pop_back();
    if (c.size() <= 1) return {};
    const int n = static_cast<int>(c.size()) - 1;
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    std::vector<Complex> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return roots;
}

namespace {

// poly := poly / (k - root), discarding the (small) remainder.
void deflate(std::vector<Complex>& poly, Complex root) {
    std::vector<Complex> out(poly.size() - 1);
    Complex carry = poly.back();
    for (int i = static_cast<int>(poly.size()) - 2; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = carry;
        carry = poly[static_cast<std::size_t>(i)] + carry * root;
    }
    poly = std::move(out);
}

// Cancels numerator/denominator roots that coincide within clustering
// tolerance, then re-normalizes the denominator to be monic.
void cancel_common_roots(std::vector<Complex>& num, std::vector<Complex>& den) {
    if (num.size() <= 1 || den.size() <= 1) return;
    auto nroots = polynomial_roots(num);
    auto droots = polynomial_roots(den);
    bool cancelled = false;
    for (const Complex& r : droots) {
        auto it = std::min_element(nroots.begin(), nroots.end(), [&](Complex a, Complex b) {
            return std::abs(a - r) < std::abs(b - r);
        });
        if (it != nroots.end() && std::abs(*it - r) < 1e-9 * std::max(1.0, std::abs(r))) {
            deflate(num, *it);
            deflate(den, r);
            nroots.erase(it);
            cancelled = true;
            if (num.size() <= 1 || den.size() <= 1) break;
        }
    }
    if (!cancelled) return;
    if (den.empty()) den = {Complex(1.0, 0.0)};
    const Complex lead = den.back();
    if (lead != Complex(0.0, 0.0)) {
        for (auto& c : den) c /= lead;
        for (auto& c : num) c /= lead;
    }
}

} // namespace

ReconstructionResult reconstruct_rational(
    std::span<const std::pair<Complex, Complex>> samples, const ReconConfig& cfg) {
    if (samples.size() < 4)
        throw ReconstructionError("too few samples for rational reconstruction", 1.0);

    // Deterministic 25% hold-out: every fourth sample.
    std::vector<std::pair<Complex, Complex>> train, held;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i % 4 == 3) held.push_back(samples[i]);
        else train.push_back(samples[i]);
    }
    if (held.empty()) held.push_back(train.back());

    // Scale the variable to a unit-ish circle so Vandermonde columns stay
    // balanced at higher degrees.
    double rho = 0.0;
    for (const auto& s : samples) rho += std::abs(s.first);
    rho = std::max(rho / static_cast<double>(samples.size()), 1e-12);

    double best_residual = std::numeric_limits<double>::infinity();
    bool any_full_rank = false;

    for (int total = 0; total <= cfg.max_num_degree + cfg.max_den_degree; ++total) {
        for (int dd = 0; dd <= std::min(total, cfg.max_den_degree); ++dd) {
            const int dn = total - dd;
            if (dn > cfg.max_num_degree) continue;
            const int unknowns = (dn + 1) + dd;  // q is monic of degree dd
            if (static_cast<int>(train.size()) < unknowns + 1) continue;

            Eigen::MatrixXcd a(train.size(), unknowns);
            Eigen::VectorXcd rhs(train.size());
            for (std::size_t r = 0; r < train.size(); ++r) {
                const Complex x = train[r].first / rho;
                const Complex v = train[r].second;
                const double wgt = 1.0 / std::max(1.0, std::abs(v));
                Complex xp(1.0, 0.0);
                for (int j = 0; j <= dn; ++j) {
                    a(static_cast<Eigen::Index>(r), j) = wgt * xp;
                    xp *= x;
                }
                xp = Complex(1.0, 0.0);
                for (int j = 0; j < dd; ++j) {
                    a(static_cast<Eigen::Index>(r), dn + 1 + j) = -wgt * v * xp;
                    xp *= x;
                }
                Complex xdd(1.0, 0.0);
                for (int j = 0; j < dd; ++j) xdd *= x;
                rhs(static_cast<Eigen::Index>(r)) = wgt * v * xdd;
            }

            Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(a);
            if (qr.rank() < unknowns) continue;
            any_full_rank = true;
            Eigen::VectorXcd sol = qr.solve(rhs);

            RationalFunction fn;
            fn.num.resize(static_cast<std::size_t>(dn) + 1);
            fn.den.resize(static_cast<std::size_t>(dd) + 1);
            for (int j = 0; j <= dn; ++j) fn.num[static_cast<std::size_t>(j)] = sol(j);
            for (int j = 0; j < dd; ++j) fn.den[static_cast<std::size_t>(j)] = sol(dn + 1 + j);
            fn.den[static_cast<std::size_t>(dd)] = Complex(1.0, 0.0);

            double residual = 0.0;
            bool ok = true;
            for (const auto& [hx, hv] : held) {
                const Complex x = hx / rho;
                const Complex q = eval_poly(fn.den, x);
                if (std::abs(q) < 1e-14) {
                    ok = false;
                    break;
                }
                const Complex p = eval_poly(fn.num, x);
                const double err = std::abs(p / q - hv) / std::max(1.0, std::abs(hv));
                residual = std::max(residual, err);
            }
            if (!ok) continue;
            best_residual = std::min(best_residual, residual);
            if (residual >= cfg.accept_tol) continue;

            // Undo the variable scaling: coefficient of k^j picks 1/rho^j,
            // then renormalize so the denominator stays monic.
            double rp = 1.0;
            for (int j = 0; j <= dn; ++j) {
                fn.num[static_cast<std::size_t>(j)] /= rp;
                rp *= rho;
            }
            rp = 1.0;
            for (int j = 0; j <= dd; ++j) {
                fn.den[static_cast<std::size_t>(j)] /= rp;
                rp *= rho;
            }
            const Complex lead = fn.den.back();
            for (auto& c : fn.num) c /= lead;
            for (auto& c : fn.den) c /= lead;

            cancel_common_roots(fn.num, fn.den);
            return ReconstructionResult{std::move(fn), residual};
        }
    }

    if (!any_full_rank)
        throw ReconstructionError(
            "rational reconstruction rank-deficient at all degrees; resample", best_residual);
    throw ReconstructionError("no degree pair met the reconstruction residual",
                              best_residual);
}

SingleValuedVerdict verify_single_valued(const SheetEvaluator& fn, const MatrixFunction& g,
                                         const SheetAtlas& atlas, double tol) {
    SingleValuedVerdict verdict;
    verdict.tolerance = tol;
    const auto& geom = atlas.geometry;
    const BranchAssignment physical = BranchAssignment::all_plus(g.tower().size());

    for (int letter = 0; letter < atlas.letter_count(); ++letter) {
        const BranchAffix& bp = geom.affixes[static_cast<std::size_t>(letter)];
        const double r = geom.loop_radius(letter);
        const double theta_side = (bp.hemisphere == Hemisphere::Upper) ? -M_PI_2 : M_PI_2;
        for (int b = 0; b < 3; ++b) {
            const double theta = theta_side + b * 2.0 * M_PI / 3.0;
            const Complex base = bp.affix + r * Complex(std::cos(theta), std::sin(theta));
            PathSpec to_base;
            try {
                to_base = plan_transport(geom, geom.anchor, base);
            } catch (const NearCutError&) {
                continue;  // base point unreachable for this angle; others suffice
            }
            const BranchAssignment at_base =
                track_tower(g.tower(), to_base, physical).assignment;
            const Eigen::MatrixXcd before = fn(base, at_base);
            PathSpec loop = PathSpec::circle(bp.affix, r, theta);
            const BranchAssignment after_loop =
                track_tower(g.tower(), loop, at_base).assignment;
            const Eigen::MatrixXcd after = fn(base, after_loop);
            const double denom = std::max(before.norm(), 1e-300);
            verdict.residual = std::max(verdict.residual, (after - before).norm() / denom);
        }
    }
    verdict.holds = verdict.residual < tol;
    return verdict;
}

} // namespace wh
