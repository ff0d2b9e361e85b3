#pragma once

#include "wh/expr.hpp"
#include "wh/matrix_function.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace wh {

// Piecewise path in the k-plane made of straight segments and circular
// arcs. Arcs are parametrized by angle; theta1 > theta0 runs
// counterclockwise.
struct PathSegment {
    enum class Kind { Line, Arc };
    Kind kind;
    // Line
    Complex a{}, b{};
    // Arc
    Complex center{};
    double radius = 0.0;
    double theta0 = 0.0, theta1 = 0.0;

    static PathSegment line(Complex a, Complex b);
    static PathSegment arc(Complex center, double radius, double theta0, double theta1);

    Complex at(double t) const;  // t in [0, 1]
    double length() const;
};

struct PathSpec {
    std::vector<PathSegment> segments;

    static PathSpec line(Complex a, Complex b);
    // Positively oriented full circle starting at angle theta_start.
    static PathSpec circle(Complex center, double radius, double theta_start);

    void append(PathSegment seg) { segments.push_back(seg); }
    void append(const PathSpec& other);

    Complex start() const;
    Complex end() const;
    double length() const;
    PathSpec reversed() const;
};

struct TrackingOptions {
    int min_line_steps = 16;
    int min_arc_steps = 64;        // per full turn
    double max_relative_jump = 0.5;
    double step_underflow = 1e-12;  // fraction of total path length
    double ambiguity_tol = 1e-13;
};

struct TrackResult {
    BranchAssignment assignment;
    std::vector<Complex> radical_values;
};

// Carries the radical tower along the path. At every accepted step each
// radical picks, among +/- the principal root of its freshly evaluated
// radicand, the candidate closest to its previous value; steps whose
// relative jump exceeds max_relative_jump are halved. Throws
// TrackingError on step underflow or a persistently ambiguous branch.
TrackResult track_tower(const RadicalTower& tower, const PathSpec& path,
                        const BranchAssignment& start,
                        const TrackingOptions& opt = {});

// Tracks the tower along the path and evaluates at the end point.
std::pair<Complex, BranchAssignment> continue_value(Expr e, const RadicalTower& tower,
                                                    const PathSpec& path,
                                                    const BranchAssignment& start,
                                                    const TrackingOptions& opt = {});

std::pair<Eigen::MatrixXcd, BranchAssignment> continue_value(const MatrixFunction& m,
                                                             const PathSpec& path,
                                                             const BranchAssignment& start,
                                                             const TrackingOptions& opt = {});

} // namespace wh
