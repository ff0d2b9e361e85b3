#include "wh/surface.hpp"

#include "wh/error.hpp"
#include "wh/ratrecon.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

namespace wh {

// ---------------------------------------------------------------------------
// SheetPermutation

SheetPermutation::SheetPermutation(std::vector<int> image) : image_(std::move(image)) {
    std::vector<bool> seen(image_.size(), false);
    for (int v : image_) {
        if (v < 0 || v >= static_cast<int>(image_.size()) || seen[static_cast<std::size_t>(v)])
            throw NumericError("sheet permutation is not a bijection");
        seen[static_cast<std::size_t>(v)] = true;
    }
}

int SheetPermutation::order() const {
    long long ord = 1;
    std::vector<bool> visited(image_.size(), false);
    for (std::size_t i = 0; i < image_.size(); ++i) {
        if (visited[i]) continue;
        int len = 0;
        int cur = static_cast<int>(i);
        while (!visited[static_cast<std::size_t>(cur)]) {
            visited[static_cast<std::size_t>(cur)] = true;
            cur = image_[static_cast<std::size_t>(cur)];
            ++len;
        }
        ord = std::lcm(ord, static_cast<long long>(len));
    }
    return static_cast<int>(ord);
}

std::vector<std::vector<int>> SheetPermutation::cycles() const {
    std::vector<std::vector<int>> out;
    std::vector<bool> visited(image_.size(), false);
    for (std::size_t i = 0; i < image_.size(); ++i) {
        if (visited[i]) continue;
        std::vector<int> cycle;
        int cur = static_cast<int>(i);
        while (!visited[static_cast<std::size_t>(cur)]) {
            visited[static_cast<std::size_t>(cur)] = true;
            cycle.push_back(cur);
            cur = image_[static_cast<std::size_t>(cur)];
        }
        if (cycle.size() > 1) out.push_back(std::move(cycle));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Geometry

double SurfaceGeometry::loop_radius(int affix_index) const {
    const BranchAffix& bp = affixes[static_cast<std::size_t>(affix_index)];
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < affixes.size(); ++j) {
        if (static_cast<int>(j) == affix_index) continue;
        nearest = std::min(nearest, std::abs(affixes[j].affix - bp.affix));
    }
    double limit = nearest;
    const double im = std::abs(bp.affix.imag());
    if (im > axis_tol) limit = std::min(limit, im);
    if (!std::isfinite(limit)) limit = std::max(1.0, std::abs(bp.affix));
    return loop_radius_factor * limit;
}

double SurfaceGeometry::distance_to_cut(Complex z, int affix_index) const {
    const BranchAffix& bp = affixes[static_cast<std::size_t>(affix_index)];
    const double dx = z.real() - bp.affix.real();
    double dy;
    if (bp.hemisphere == Hemisphere::Upper) {
        // Cut runs from the affix toward +i*inf.
        dy = bp.affix.imag() - z.imag();
    } else {
        dy = z.imag() - bp.affix.imag();
    }
    if (dy <= 0.0) return std::abs(dx);
    return std::hypot(dx, dy);
}

double SurfaceGeometry::min_cut_distance(Complex z) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < affixes.size(); ++i)
        d = std::min(d, distance_to_cut(z, static_cast<int>(i)));
    return d;
}

double SurfaceGeometry::min_affix_distance(Complex z) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& bp : affixes) d = std::min(d, std::abs(z - bp.affix));
    return d;
}

namespace {

double segment_point_distance(Complex a, Complex b, Complex p) {
    const Complex ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double t = ((p.real() - a.real()) * ab.real() + (p.imag() - a.imag()) * ab.imag()) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

} // namespace

namespace {

// Real-axis leg from x0 to x1. The axis crosses no cuts, but affixes close
// to it need a detour on the side away from their cut. A detour is planned
// only when the leg actually passes the affix's vertical line; travel that
// merely ends near an affix stays straight (clearance is checked by the
// caller's vertical leg).
void append_real_leg(PathSpec& path, const SurfaceGeometry& geom, double x0, double x1) {
    if (x0 == x1) return;
    const bool forward = x1 > x0;
    const double dir = forward ? 1.0 : -1.0;

    struct Crossing {
        double x;
        int index;
        double radius;
    };
    std::vector<Crossing> crossings;
    for (std::size_t i = 0; i < geom.affixes.size(); ++i) {
        const BranchAffix& bp = geom.affixes[i];
        const double zone = geom.loop_radius(static_cast<int>(i));
        if (std::abs(bp.affix.imag()) >= zone) continue;  // leg clears it vertically
        const double re = bp.affix.real();
        if ((re - x0) * (re - x1) >= 0.0) continue;  // leg does not pass it
        double r = zone;
        r = std::min(r, 0.5 * std::abs(x0 - re));
        r = std::min(r, 0.5 * std::abs(x1 - re));
        if (r < geom.clearance)
            throw NearCutError("transport endpoint too close to a branch affix");
        crossings.push_back({re, static_cast<int>(i), r});
    }
    std::sort(crossings.begin(), crossings.end(), [&](const Crossing& a, const Crossing& b) {
        return forward ? a.x < b.x : a.x > b.x;
    });

    Complex cur(x0, 0.0);
    for (const Crossing& c : crossings) {
        const BranchAffix& bp = geom.affixes[static_cast<std::size_t>(c.index)];
        const Complex entry(c.x - dir * c.radius, 0.0);
        const Complex exit(c.x + dir * c.radius, 0.0);
        // Pass below an upper affix (its cut goes up) and above a lower one.
        const bool below = bp.hemisphere == Hemisphere::Upper;
        const double th_in = forward ? M_PI : 0.0;
        const double th_out = forward ? (below ? 2.0 * M_PI : 0.0) : (below ? -M_PI : M_PI);
        const Complex arc_start =
            bp.affix + c.radius * Complex(std::cos(th_in), std::sin(th_in));
        const Complex arc_end =
            bp.affix + c.radius * Complex(std::cos(th_out), std::sin(th_out));
        if (std::abs(cur - entry) > 0.0) path.append(PathSegment::line(cur, entry));
        if (std::abs(entry - arc_start) > 0.0)
            path.append(PathSegment::line(entry, arc_start));
        path.append(PathSegment::arc(bp.affix, c.radius, th_in, th_out));
        if (std::abs(arc_end - exit) > 0.0) path.append(PathSegment::line(arc_end, exit));
        cur = exit;
    }
    if (std::abs(cur - Complex(x1, 0.0)) > 0.0)
        path.append(PathSegment::line(cur, Complex(x1, 0.0)));
}

} // namespace

PathSpec plan_transport(const SurfaceGeometry& geom, double from_x, Complex to) {
    if (geom.min_affix_distance(to) < geom.clearance)
        throw NearCutError("evaluation point too close to a branch affix");

    PathSpec path;
    const Complex corner(to.real(), 0.0);
    append_real_leg(path, geom, from_x, to.real());

    // Vertical leg. No detours here: passing within clearance of an affix
    // (or beyond it across its cut) is reported so the caller can perturb.
    if (std::abs(to - corner) > 0.0) {
        for (std::size_t i = 0; i < geom.affixes.size(); ++i) {
            const BranchAffix& bp = geom.affixes[i];
            if (segment_point_distance(corner, to, bp.affix) < geom.clearance)
                throw NearCutError("evaluation point too close to a cut or branch affix");
        }
        path.append(PathSegment::line(corner, to));
    }
    if (path.segments.empty()) path.append(PathSegment::line(Complex(from_x, 0.0), to));
    return path;
}

PathSpec plan_monodromy_loop(const SurfaceGeometry& geom, int affix_index,
                             double radius_factor) {
    const BranchAffix& bp = geom.affixes[static_cast<std::size_t>(affix_index)];
    double r = geom.loop_radius(affix_index);
    if (radius_factor > 0.0) r *= radius_factor / geom.loop_radius_factor;
    const bool upper = bp.hemisphere == Hemisphere::Upper;
    double theta_base = upper ? -M_PI_2 : M_PI_2;

    PathSpec approach;
    if (std::abs(bp.affix.imag()) >= r) {
        // The base point sits between the affix and the real axis; the
        // plain transport reaches it without touching the loop disc. When
        // other affixes' cuts block that point (stacked affixes), swing the
        // base angle away in a fixed order until one is reachable.
        bool reached = false;
        for (int j : {0, 1, -1, 2, -2, 3, -3, 4, -4, 5, -5}) {
            const double theta = (upper ? -M_PI_2 : M_PI_2) + j * M_PI / 6.0;
            const Complex candidate =
                bp.affix + r * Complex(std::cos(theta), std::sin(theta));
            try {
                approach = plan_transport(geom, geom.anchor, candidate);
                theta_base = theta;
                reached = true;
                break;
            } catch (const NearCutError&) {
                continue;
            }
        }
        if (!reached)
            throw NearCutError("no reachable base point for the bypass about affix " +
                               std::to_string(affix_index));
    } else {
        // Near-axis affix: stage on the real axis at distance exactly r on
        // the anchor's side, then swing to the base point along the loop
        // circle on the no-cut side.
        const double sa = (geom.anchor <= bp.affix.real()) ? -1.0 : 1.0;
        const double half_chord =
            std::sqrt(std::max(r * r - bp.affix.imag() * bp.affix.imag(), 0.0));
        const Complex stage(bp.affix.real() + sa * half_chord, 0.0);
        PathSpec to_stage;
        append_real_leg(to_stage, geom, geom.anchor, stage.real());
        if (to_stage.segments.empty())
            to_stage.append(PathSegment::line(Complex(geom.anchor, 0.0), stage));
        double dy = -bp.affix.imag();
        // Keep the staging angle on the no-cut side even when the affix
        // sits a hair on the other side of the axis.
        if (upper) dy = std::min(dy, -0.0);
        else dy = std::max(dy, 0.0);
        const double theta_stage = std::atan2(dy, stage.real() - bp.affix.real());
        const Complex arc_start =
            bp.affix + r * Complex(std::cos(theta_stage), std::sin(theta_stage));
        approach = to_stage;
        if (std::abs(stage - arc_start) > 0.0)
            approach.append(PathSegment::line(stage, arc_start));
        if (theta_stage != theta_base)
            approach.append(PathSegment::arc(bp.affix, r, theta_stage, theta_base));
    }

    PathSpec loop = approach;
    loop.append(PathSegment::arc(bp.affix, r, theta_base, theta_base + 2.0 * M_PI));
    loop.append(approach.reversed());
    return loop;
}

// ---------------------------------------------------------------------------
// Branch affix search

namespace {

// Enumerate the sign assignments of `inner` radical ids; all remaining
// signs stay +1 (they do not occur in the radicand).
std::vector<BranchAssignment> inner_assignments(const std::vector<int>& inner,
                                                std::size_t tower_size) {
    std::vector<BranchAssignment> out;
    const std::size_t m = inner.size();
    out.reserve(static_cast<std::size_t>(1) << m);
    for (std::size_t mask = 0; mask < (static_cast<std::size_t>(1) << m); ++mask) {
        BranchAssignment a = BranchAssignment::all_plus(tower_size);
        for (std::size_t b = 0; b < m; ++b)
            if (mask & (static_cast<std::size_t>(1) << b))
                a.set(static_cast<std::size_t>(inner[b]), -1);
        out.push_back(std::move(a));
    }
    return out;
}

Complex newton_polish(Expr radicand, const RadicalTower& tower,
                      const BranchAssignment& sigma, Complex root, double scale) {
    Complex z = root;
    for (int iter = 0; iter < 8; ++iter) {
        Complex f;
        try {
            f = evaluate(radicand, z, tower, sigma);
        } catch (const EvalError&) {
            return root;
        }
        const double h = 1e-7 * std::max(1.0, std::abs(z));
        Complex fp;
        try {
            const Complex f1 = evaluate(radicand, z + Complex(h, 0.0), tower, sigma);
            const Complex f2 = evaluate(radicand, z - Complex(h, 0.0), tower, sigma);
            fp = (f1 - f2) / Complex(2.0 * h, 0.0);
        } catch (const EvalError&) {
            return z;
        }
        if (std::abs(fp) < 1e-300) return z;
        const Complex step = f / fp;
        z -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
        if (std::abs(z - root) > 0.5 * std::max(1.0, scale)) return root;  // ran away
    }
    return z;
}

} // namespace

std::vector<BranchAffix> find_branch_affixes(const MatrixFunction& g,
                                             const AffixSearchConfig& cfg) {
    const RadicalTower& tower = g.tower();
    if (tower.size() == 0) return {};

    struct Candidate {
        Complex affix;
        int radical;
    };
    std::vector<Candidate> candidates;
    const double scale0 = g.coefficient_scale();

    for (std::size_t id = 0; id < tower.size(); ++id) {
        const std::vector<int>& inner = tower.inner_radicals(id);
        if (static_cast<int>(inner.size()) > cfg.max_inner_radicals)
            throw SurfaceError("radical tower too wide for elimination");
        const Expr radicand = tower.radicand(id);
        const auto assignments = inner_assignments(inner, tower.size());

        auto [nb, db] = degree_bound(radicand);
        const int factor = static_cast<int>(assignments.size());
        const int dn = std::min(cfg.max_poly_degree, factor * std::max(nb, 1));
        const int dd = std::min(cfg.max_poly_degree, factor * db);

        // The product of the radicand over every inner sign assignment is
        // single-valued, hence rational in k; its numerator roots are the
        // candidate affixes contributed by this radical.
        auto eliminate = [&](Complex k) -> Complex {
            Complex prod(1.0, 0.0);
            for (const auto& sigma : assignments)
                prod *= evaluate(radicand, k, tower, sigma);
            return prod;
        };

        ReconstructionResult rec;
        bool reconstructed = false;
        for (double radius_scale : {1.0, 3.0, 0.37}) {
            const int count = std::max(4 * (dn + dd) + 12, 32);
            std::vector<std::pair<Complex, Complex>> samples;
            samples.reserve(static_cast<std::size_t>(count));
            const double r1 = 1.7 * scale0 * radius_scale;
            const double r2 = 3.3 * scale0 * radius_scale;
            for (int s = 0; s < count; ++s) {
                const double r = (s % 2 == 0) ? r1 : r2;
                const double theta = 2.0 * M_PI * (s + 0.137) / count + 0.41;
                const Complex k = r * Complex(std::cos(theta), std::sin(theta));
                try {
                    const Complex v = eliminate(k);
                    if (std::isfinite(v.real()) && std::isfinite(v.imag()) &&
                        std::abs(v) < 1e120)
                        samples.emplace_back(k, v);
                } catch (const EvalError&) {
                    continue;
                }
            }
            if (static_cast<int>(samples.size()) < 2 * (dn + dd + 2)) continue;
            try {
                ReconConfig rc;
                rc.max_num_degree = dn;
                rc.max_den_degree = dd;
                rec = reconstruct_rational(samples, rc);
                reconstructed = true;
                break;
            } catch (const ReconstructionError&) {
                continue;
            }
        }
        if (!reconstructed)
            throw SurfaceError("could not reconstruct the elimination polynomial of radical " +
                               std::to_string(id));

        double num_max = 0.0;
        for (const Complex& c : rec.fn.num) num_max = std::max(num_max, std::abs(c));
        if (num_max == 0.0)
            throw SurfaceError("radicand of radical " + std::to_string(id) +
                               " vanishes identically");
        if (rec.fn.num_degree() == 0) continue;  // no branch points from this radical

        for (const Complex& root : polynomial_roots(rec.fn.num)) {
            // Verify that the radicand itself vanishes on some sheet, and
            // polish the root on that sheet.
            double best = std::numeric_limits<double>::infinity();
            const BranchAssignment* best_sigma = nullptr;
            double value_scale = 0.0;
            for (const auto& sigma : assignments) {
                try {
                    const double v = std::abs(evaluate(radicand, root, tower, sigma));
                    value_scale = std::max(value_scale, v);
                    if (v < best) {
                        best = v;
                        best_sigma = &sigma;
                    }
                } catch (const EvalError&) {
                    continue;
                }
            }
            if (best_sigma == nullptr) continue;
            const Complex polished =
                newton_polish(radicand, tower, *best_sigma, root, scale0);
            double vanish;
            try {
                vanish = std::abs(evaluate(radicand, polished, tower, *best_sigma));
            } catch (const EvalError&) {
                continue;
            }
            if (vanish < cfg.vanish_tol * std::max(1.0, value_scale))
                candidates.push_back({polished, static_cast<int>(id)});
        }
    }

    // Cluster candidates within the absolute tolerance.
    std::vector<BranchAffix> affixes;
    std::vector<int> counts;
    for (const Candidate& c : candidates) {
        bool merged = false;
        for (std::size_t i = 0; i < affixes.size(); ++i) {
            if (std::abs(affixes[i].affix - c.affix) <
                std::max(cfg.cluster_tol, 1e-12 * scale0)) {
                if (std::find(affixes[i].radicals.begin(), affixes[i].radicals.end(),
                              c.radical) == affixes[i].radicals.end())
                    affixes[i].radicals.push_back(c.radical);
                // Running mean keeps the affix estimate centered.
                affixes[i].affix =
                    (affixes[i].affix * static_cast<double>(counts[i]) + c.affix) /
                    static_cast<double>(counts[i] + 1);
                ++counts[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            affixes.push_back(BranchAffix{c.affix, Hemisphere::Upper, 0, {c.radical}, false});
            counts.push_back(1);
        }
    }

    double affix_scale = 1.0;
    for (const auto& bp : affixes) affix_scale = std::max(affix_scale, std::abs(bp.affix));
    const double axis_tol = cfg.axis_tol_rel * affix_scale;

    for (auto& bp : affixes) {
        std::sort(bp.radicals.begin(), bp.radicals.end());
        if (bp.affix.imag() > axis_tol) {
            bp.hemisphere = Hemisphere::Upper;
        } else if (bp.affix.imag() < -axis_tol) {
            bp.hemisphere = Hemisphere::Lower;
        } else {
            bp.near_real_axis = true;
            if (bp.affix.real() > axis_tol) bp.hemisphere = Hemisphere::Upper;
            else if (bp.affix.real() < -axis_tol) bp.hemisphere = Hemisphere::Lower;
            else
                throw SurfaceError(
                    "branch affix at the origin; this surface is unsupported");
        }
    }

    // Canonical order: uppers first, each hemisphere sorted by (Re, Im).
    std::stable_sort(affixes.begin(), affixes.end(),
                     [](const BranchAffix& a, const BranchAffix& b) {
                         if (a.hemisphere != b.hemisphere)
                             return a.hemisphere == Hemisphere::Upper;
                         if (a.affix.real() != b.affix.real())
                             return a.affix.real() < b.affix.real();
                         return a.affix.imag() < b.affix.imag();
                     });
    return affixes;
}

// ---------------------------------------------------------------------------
// Atlas

namespace {

SurfaceGeometry make_geometry(const MatrixFunction& g, std::vector<BranchAffix> affixes,
                              const SurfaceConfig& cfg) {
    SurfaceGeometry geom;
    geom.affixes = std::move(affixes);
    geom.upper_count = 0;
    for (const auto& bp : geom.affixes)
        if (bp.hemisphere == Hemisphere::Upper) ++geom.upper_count;
    geom.anchor = g.anchor();
    geom.scale = 1.0;
    for (const auto& bp : geom.affixes) geom.scale = std::max(geom.scale, std::abs(bp.affix));
    geom.clearance = cfg.clearance_rel * geom.scale;
    geom.axis_tol = cfg.search.axis_tol_rel * geom.scale;
    geom.loop_radius_factor = cfg.loop_radius_factor;

    for (const auto& bp : geom.affixes) {
        if (std::abs(Complex(geom.anchor, 0.0) - bp.affix) <
            std::max(10.0 * cfg.search.cluster_tol, 8.0 * geom.clearance))
            throw InputError(
                "anchor point coincides with a branch affix; set an explicit anchor");
    }
    return geom;
}

} // namespace

std::string SheetAtlas::letter_name(int letter) const {
    const bool upper = letter < geometry.upper_count;
    const int idx = upper ? letter : letter - geometry.upper_count;
    return (upper ? "a" : "b") + std::to_string(idx + 1);
}

int SheetAtlas::letter_index(Hemisphere h, int affix_in_hemisphere) const {
    return (h == Hemisphere::Upper) ? affix_in_hemisphere
                                    : geometry.upper_count + affix_in_hemisphere;
}

AffixOrders SheetAtlas::orders() const {
    AffixOrders o;
    for (int i = 0; i < letter_count(); ++i) {
        const int n = geometry.affixes[static_cast<std::size_t>(i)].order;
        if (letter_hemisphere(i) == Hemisphere::Upper) o.upper.push_back(n);
        else o.lower.push_back(n);
    }
    return o;
}

int SheetAtlas::apply_letter(int letter, int exponent, int sheet) const {
    const SheetPermutation& p = letter_perm[static_cast<std::size_t>(letter)];
    int s = sheet;
    for (int i = 0; i < exponent; ++i) s = p.apply(s);
    return s;
}

int SheetAtlas::apply_word(const Word& w, int sheet) const {
    int s = sheet;
    for (const Letter& l : w.letters())
        s = apply_letter(letter_index(l.hemisphere, l.affix), l.exponent, s);
    return s;
}

int SheetAtlas::find_sheet(const BranchAssignment& a) const {
    for (std::size_t i = 0; i < sheets.size(); ++i)
        if (sheets[i] == a) return static_cast<int>(i);
    return -1;
}

namespace {

// Tracks one bypass loop and returns the anchor assignment it ends on.
BranchAssignment loop_once(const MatrixFunction& g, const SurfaceGeometry& geom,
                           int letter, const BranchAssignment& start,
                           const TrackingOptions& topt, double radius_factor) {
    PathSpec loop = plan_monodromy_loop(geom, letter, radius_factor);
    return track_tower(g.tower(), loop, start, topt).assignment;
}

} // namespace

SheetAtlas build_atlas(const MatrixFunction& g, const SurfaceConfig& cfg) {
    SheetAtlas atlas;
    atlas.geometry = make_geometry(g, find_branch_affixes(g, cfg.search), cfg);
    const int letters = static_cast<int>(atlas.geometry.affixes.size());

    atlas.sheets.push_back(BranchAssignment::all_plus(g.tower().size()));

    // Closure under all letters, breadth-first from the physical sheet.
    // images[l][s] is the sheet reached from s by one positive bypass of
    // letter l; -1 when not yet tracked.
    std::vector<std::vector<int>> images(static_cast<std::size_t>(letters));
    std::deque<int> queue{0};
    std::vector<int> bfs_order{0};

    auto ensure_letter_size = [&](std::size_t n) {
        for (auto& v : images) v.resize(n, -1);
    };
    ensure_letter_size(1);

    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        for (int l = 0; l < letters; ++l) {
            if (images[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)] >= 0)
                continue;
            const BranchAssignment end = loop_once(
                g, atlas.geometry, l, atlas.sheets[static_cast<std::size_t>(s)],
                cfg.tracking, 0.0);
            int target = atlas.find_sheet(end);
            if (target < 0) {
                if (static_cast<int>(atlas.sheets.size()) >= cfg.max_sheets)
                    throw SurfaceError("sheet count exceeded the configured maximum");
                atlas.sheets.push_back(end);
                target = static_cast<int>(atlas.sheets.size()) - 1;
                ensure_letter_size(atlas.sheets.size());
                queue.push_back(target);
                bfs_order.push_back(target);
            }
            images[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)] = target;
        }
    }

    for (int l = 0; l < letters; ++l)
        atlas.letter_perm.emplace_back(images[static_cast<std::size_t>(l)]);

    // Monodromy permutation orders become the affix orders.
    for (int l = 0; l < letters; ++l)
        atlas.geometry.affixes[static_cast<std::size_t>(l)].order =
            std::max(1, atlas.letter_perm[static_cast<std::size_t>(l)].order());

    // Shortest representative words via BFS over single bypasses; letters
    // are explored in canonical order, so first discovery is the
    // lexicographically least among the shortest.
    const AffixOrders orders = atlas.orders();
    atlas.representatives.assign(atlas.sheets.size(), Word());
    std::vector<bool> discovered(atlas.sheets.size(), false);
    discovered[0] = true;
    std::deque<int> rq{0};
    while (!rq.empty()) {
        const int s = rq.front();
        rq.pop_front();
        for (int l = 0; l < letters; ++l) {
            const int t = atlas.letter_perm[static_cast<std::size_t>(l)].apply(s);
            if (discovered[static_cast<std::size_t>(t)]) continue;
            discovered[static_cast<std::size_t>(t)] = true;
            const Hemisphere h = atlas.letter_hemisphere(l);
            const int idx = (h == Hemisphere::Upper) ? l : l - atlas.geometry.upper_count;
            atlas.representatives[static_cast<std::size_t>(t)] =
                compose(atlas.representatives[static_cast<std::size_t>(s)],
                        Word::letter(h, idx, 1, orders), orders);
            rq.push_back(t);
        }
    }

    return atlas;
}

SheetPermutation monodromy_permutation(const MatrixFunction& g, const SheetAtlas& atlas,
                                       int letter, double radius_factor,
                                       const SurfaceConfig& cfg) {
    std::vector<int> image(atlas.sheets.size());
    for (std::size_t s = 0; s < atlas.sheets.size(); ++s) {
        const BranchAssignment end =
            loop_once(g, atlas.geometry, letter, atlas.sheets[s], cfg.tracking, radius_factor);
        const int t = atlas.find_sheet(end);
        if (t < 0)
            throw SurfaceError("monodromy left the computed sheet set; atlas is inconsistent");
        image[s] = t;
    }
    return SheetPermutation(std::move(image));
}

BalanceVerdict is_balanced(const SheetAtlas& atlas) {
    auto orbit_covers = [&](Hemisphere h, int& witness) {
        std::vector<bool> reached(atlas.sheets.size(), false);
        std::deque<int> queue{0};
        reached[0] = true;
        std::size_t count = 1;
        while (!queue.empty()) {
            const int s = queue.front();
            queue.pop_front();
            for (int l = 0; l < atlas.letter_count(); ++l) {
                if (atlas.letter_hemisphere(l) != h) continue;
                const int t = atlas.letter_perm[static_cast<std::size_t>(l)].apply(s);
                if (!reached[static_cast<std::size_t>(t)]) {
                    reached[static_cast<std::size_t>(t)] = true;
                    ++count;
                    queue.push_back(t);
                }
            }
        }
        if (count == atlas.sheets.size()) return true;
        for (std::size_t i = 0; i < reached.size(); ++i) {
            if (!reached[i]) {
                witness = static_cast<int>(i);
                return false;
            }
        }
        return true;
    };

    BalanceVerdict verdict;
    int witness = -1;
    if (!orbit_covers(Hemisphere::Upper, witness)) {
        verdict.balanced = false;
        verdict.failing_side = Hemisphere::Upper;
        verdict.witness_sheet = witness;
        return verdict;
    }
    if (!orbit_covers(Hemisphere::Lower, witness)) {
        verdict.balanced = false;
        verdict.failing_side = Hemisphere::Lower;
        verdict.witness_sheet = witness;
        return verdict;
    }
    verdict.balanced = true;
    return verdict;
}

// ---------------------------------------------------------------------------
// Diagrams

namespace {

std::string format_affix(Complex a) {
    std::ostringstream os;
    os.precision(4);
    os << a.real();
    if (a.imag() != 0.0) {
        os << (a.imag() >= 0 ? "+" : "-");
        os << std::abs(a.imag()) << "i";
    }
    return os.str();
}

} // namespace

std::string render_text_diagram(const SheetAtlas& atlas) {
    const int n = atlas.sheet_count();
    const int letters = atlas.letter_count();
    std::ostringstream os;
    os << "Riemann surface: " << n << " sheet" << (n == 1 ? "" : "s") << ", " << letters
       << " branch affix" << (letters == 1 ? "" : "es") << "\n";
    for (int l = 0; l < letters; ++l) {
        os << "  " << atlas.letter_name(l) << " @ " << format_affix(atlas.affix(l).affix)
           << " (order " << atlas.affix(l).order << ")\n";
    }
    os << "\n";

    // One column per affix; links mark the sheets its permutation moves.
    const int col_width = 6;
    os << std::string(14, ' ');
    for (int l = 0; l < letters; ++l) {
        std::string name = atlas.letter_name(l);
        os << name << std::string(col_width - name.size(), ' ');
    }
    os << "\n";

    std::vector<std::vector<std::vector<int>>> cycles;
    cycles.reserve(static_cast<std::size_t>(letters));
    for (int l = 0; l < letters; ++l)
        cycles.push_back(atlas.letter_perm[static_cast<std::size_t>(l)].cycles());

    for (int s = 0; s < n; ++s) {
        std::string label = "s" + std::to_string(s) + " {" +
                            atlas.representatives[static_cast<std::size_t>(s)].to_string() +
                            "}";
        if (label.size() > 13) label = label.substr(0, 13);
        os << label << std::string(14 - label.size(), ' ');
        for (int l = 0; l < letters; ++l) {
            bool member = false;
            for (const auto& cyc : cycles[static_cast<std::size_t>(l)])
                if (std::find(cyc.begin(), cyc.end(), s) != cyc.end()) member = true;
            os << (member ? "o" : "-") << std::string(col_width - 1, ' ');
        }
        os << "\n";
        if (s + 1 < n) {
            os << std::string(14, ' ');
            for (int l = 0; l < letters; ++l) {
                bool spans = false;
                for (const auto& cyc : cycles[static_cast<std::size_t>(l)]) {
                    const int lo = *std::min_element(cyc.begin(), cyc.end());
                    const int hi = *std::max_element(cyc.begin(), cyc.end());
                    if (lo <= s && s + 1 <= hi) spans = true;
                }
                os << (spans ? "|" : " ") << std::string(col_width - 1, ' ');
            }
            os << "\n";
        }
    }
    return os.str();
}

std::string render_dot_diagram(const SheetAtlas& atlas) {
    std::ostringstream os;
    os << "graph riemann_surface {\n  rankdir=LR;\n  node [shape=box];\n";
    for (int s = 0; s < atlas.sheet_count(); ++s) {
        os << "  s" << s << " [label=\"s" << s << " {"
           << atlas.representatives[static_cast<std::size_t>(s)].to_string() << "}\"];\n";
    }
    for (int l = 0; l < atlas.letter_count(); ++l) {
        for (const auto& cyc : atlas.letter_perm[static_cast<std::size_t>(l)].cycles()) {
            for (std::size_t i = 0; i < cyc.size(); ++i) {
                const int from = cyc[i];
                const int to = cyc[(i + 1) % cyc.size()];
                if (cyc.size() == 2 && i == 1) break;  // undirected pair once
                os << "  s" << from << " -- s" << to << " [label=\"" << atlas.letter_name(l)
                   << "\"];\n";
            }
        }
    }
    os << "}\n";
    return os.str();
}

} // namespace wh
