#include "wh/tracking.hpp"

#include "wh/error.hpp"

#include <algorithm>
#include <cmath>

namespace wh {

PathSegment PathSegment::line(Complex a, Complex b) {
    PathSegment s;
    s.kind = Kind::Line;
    s.a = a;
    s.b = b;
    return s;
}

PathSegment PathSegment::arc(Complex center, double radius, double theta0, double theta1) {
    PathSegment s;
    s.kind = Kind::Arc;
    s.center = center;
    s.radius = radius;
    s.theta0 = theta0;
    s.theta1 = theta1;
    return s;
}

Complex PathSegment::at(double t) const {
    if (kind == Kind::Line) return a + t * (b - a);
    double theta = theta0 + t * (theta1 - theta0);
    return center + radius * Complex(std::cos(theta), std::sin(theta));
}

double PathSegment::length() const {
    if (kind == Kind::Line) return std::abs(b - a);
    return radius * std::abs(theta1 - theta0);
}

PathSpec PathSpec::line(Complex a, Complex b) {
    PathSpec p;
    p.append(PathSegment::line(a, b));
    return p;
}

PathSpec PathSpec::circle(Complex center, double radius, double theta_start) {
    PathSpec p;
    p.append(PathSegment::arc(center, radius, theta_start, theta_start + 2.0 * M_PI));
    return p;
}

void PathSpec::append(const PathSpec& other) {
    segments.insert(segments.end(), other.segments.begin(), other.segments.end());
}

Complex PathSpec::start() const { return segments.front().at(0.0); }
Complex PathSpec::end() const { return segments.back().at(1.0); }

double PathSpec::length() const {
    double s = 0.0;
    for (const auto& seg : segments) s += seg.length();
    return s;
}

PathSpec PathSpec::reversed() const {
    PathSpec out;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
        PathSegment s = *it;
        if (s.kind == PathSegment::Kind::Line) std::swap(s.a, s.b);
        else std::swap(s.theta0, s.theta1);
        out.append(s);
    }
    return out;
}

namespace {

struct TrackerState {
    BranchAssignment signs;
    std::vector<Complex> values;
};

// One trial move of the whole tower to z. Returns: 0 accepted, 1 rejected
// (halve the step), 2 ambiguous (both roots equidistant).
int try_advance(const RadicalTower& tower, Complex z, TrackerState& state,
                const TrackingOptions& opt) {
    const std::size_t n = tower.size();
    BranchAssignment new_signs = state.signs;
    std::vector<Complex> new_values(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex radicand;
        try {
            radicand = evaluate(tower.radicand(i), z, tower, new_signs);
        } catch (const EvalError&) {
            return 1;  // pole on the trial point; shrink the step
        }
        if (!std::isfinite(radicand.real()) || !std::isfinite(radicand.imag())) return 1;
        const Complex ref = std::sqrt(radicand);
        const Complex prev = state.values[i];
        const double dp = std::abs(ref - prev);
        const double dm = std::abs(-ref - prev);
        if (std::abs(dp - dm) < opt.ambiguity_tol * std::max(1.0, std::abs(prev)))
            return 2;
        const int sign = (dp <= dm) ? +1 : -1;
        const Complex chosen = (sign > 0) ? ref : -ref;
        const double delta = std::abs(chosen - prev);
        const double scale = std::max(std::abs(prev), std::abs(chosen));
        if (delta > 1e-12 && scale > 0.0 && delta / scale > opt.max_relative_jump)
            return 1;
        new_signs.set(i, sign);
        new_values[i] = chosen;
    }
    state.signs = std::move(new_signs);
    state.values = std::move(new_values);
    return 0;
}

} // namespace

TrackResult track_tower(const RadicalTower& tower, const PathSpec& path,
                        const BranchAssignment& start, const TrackingOptions& opt) {
    if (start.size() != tower.size())
        throw TrackingError("branch assignment length does not match the tower");

    TrackerState state;
    state.signs = start;
    state.values.resize(tower.size());
    const Complex z0 = path.start();
    for (std::size_t i = 0; i < tower.size(); ++i)
        state.values[i] = evaluate(tower.radical(i), z0, tower, start);

    const double total_length = std::max(path.length(), 1e-300);

    for (const PathSegment& seg : path.segments) {
        int base_steps = opt.min_line_steps;
        if (seg.kind == PathSegment::Kind::Arc) {
            double turns = std::abs(seg.theta1 - seg.theta0) / (2.0 * M_PI);
            base_steps = std::max(8, static_cast<int>(std::ceil(opt.min_arc_steps * turns)));
        }
        const double seg_fraction = seg.length() / total_length;
        const double dt_floor = (seg_fraction > 0.0)
                                    ? opt.step_underflow / seg_fraction
                                    : 1.0;
        double t = 0.0;
        double dt = 1.0 / base_steps;
        const double dt_max = dt;
        bool ambiguous_at_floor = false;
        while (t < 1.0) {
            double target = std::min(1.0, t + dt);
            TrackerState trial = state;
            int rc = try_advance(tower, seg.at(target), trial, opt);
            if (rc == 0) {
                state = std::move(trial);
                t = target;
                dt = std::min(dt * 1.6, dt_max);
                ambiguous_at_floor = false;
            } else {
                dt *= 0.5;
                ambiguous_at_floor = (rc == 2);
                if (dt < dt_floor) {
                    if (ambiguous_at_floor)
                        throw TrackingError(
                            "ambiguous branch choice while tracking (both square roots "
                            "equidistant); perturb the path away from the singularity");
                    throw TrackingError(
                        "path tracking step underflow near an unflagged singularity");
                }
            }
        }
    }

    return TrackResult{state.signs, state.values};
}

std::pair<Complex, BranchAssignment> continue_value(Expr e, const RadicalTower& tower,
                                                    const PathSpec& path,
                                                    const BranchAssignment& start,
                                                    const TrackingOptions& opt) {
    TrackResult r = track_tower(tower, path, start, opt);
    return {evaluate(e, path.end(), tower, r.assignment), r.assignment};
}

std::pair<Eigen::MatrixXcd, BranchAssignment> continue_value(const MatrixFunction& m,
                                                             const PathSpec& path,
                                                             const BranchAssignment& start,
                                                             const TrackingOptions& opt) {
    TrackResult r = track_tower(m.tower(), path, start, opt);
    return {m.evaluate(path.end(), r.assignment), r.assignment};
}

} // namespace wh
