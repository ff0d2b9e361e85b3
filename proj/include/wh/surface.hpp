#pragma once

#include "wh/matrix_function.hpp"
#include "wh/tracking.hpp"
#include "wh/words.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wh {

// A branch point of the surface. Affixes within axis_tol of the real
// axis are admitted and classified by the sign of their real part,
// realizing the limit convention of constants approached from the upper
// half-plane; such affixes carry near_real_axis = true.
struct BranchAffix {
    Complex affix;
    Hemisphere hemisphere;
    int order = 0;              // monodromy permutation order; set by build_atlas
    std::vector<int> radicals;  // ids whose radicand vanishes here on some sheet
    bool near_real_axis = false;
};

struct AffixSearchConfig {
    double cluster_tol = 1e-9;     // absolute dedupe tolerance
    double vanish_tol = 1e-7;      // relative "radicand vanishes" verification
    double axis_tol_rel = 1e-7;    // |Im| below this (times scale) counts as on-axis
    int max_inner_radicals = 16;   // 2^m elimination factors cap
    int max_poly_degree = 48;
};

std::vector<BranchAffix> find_branch_affixes(const MatrixFunction& g,
                                             const AffixSearchConfig& cfg = {});

// Bijection on sheet indices stored as an image array.
class SheetPermutation {
public:
    SheetPermutation() = default;
    explicit SheetPermutation(std::vector<int> image);

    int apply(int sheet) const { return image_.at(static_cast<std::size_t>(sheet)); }
    int size() const { return static_cast<int>(image_.size()); }
    int order() const;  // lcm of cycle lengths
    const std::vector<int>& image() const { return image_; }
    std::vector<std::vector<int>> cycles() const;  // nontrivial cycles, sorted

    bool operator==(const SheetPermutation&) const = default;

private:
    std::vector<int> image_;
};

struct SurfaceConfig {
    AffixSearchConfig search;
    TrackingOptions tracking;
    double loop_radius_factor = 0.25;
    double clearance_rel = 1e-6;  // times geometric scale
    int max_sheets = 4096;
};

// Geometry shared by transport planning and monodromy loops.
struct SurfaceGeometry {
    std::vector<BranchAffix> affixes;  // canonical order: uppers then lowers
    int upper_count = 0;
    double anchor = 0.0;
    double scale = 1.0;     // max(1, max |affix|)
    double clearance = 1e-6;
    double axis_tol = 1e-7;
    double loop_radius_factor = 0.25;

    double loop_radius(int affix_index) const;
    double distance_to_cut(Complex z, int affix_index) const;
    double min_cut_distance(Complex z) const;
    double min_affix_distance(Complex z) const;
};

// Cut-avoiding path from the anchor (or any on-axis point) to z: a leg
// along the real axis followed by a vertical leg, with detours around
// affixes that sit too close to the real leg. Since the plane minus the
// vertical cuts is simply connected, every cut-avoiding path yields the
// same branch transport. Throws NearCutError when z or the vertical leg
// is within clearance of an affix.
PathSpec plan_transport(const SurfaceGeometry& geom, double from_x, Complex to);

// Loop realizing one positive bypass about the given affix: transport
// from the anchor to a base point directly below (upper affix) or above
// (lower affix), a positively oriented circle, and the return transport.
PathSpec plan_monodromy_loop(const SurfaceGeometry& geom, int affix_index,
                             double radius_factor = 0.0 /* 0 = default */);

// Computed Riemann-surface structure. Letters are indexed 0..L-1 in the
// canonical order (a-letters for upper affixes sorted by (Re, Im), then
// b-letters for lower affixes likewise); letter i corresponds to
// geometry affix i.
struct SheetAtlas {
    SurfaceGeometry geometry;
    std::vector<BranchAssignment> sheets;  // [0] is the physical sheet
    std::vector<SheetPermutation> letter_perm;
    std::vector<Word> representatives;     // BFS-shortest, lexicographic ties

    int sheet_count() const { return static_cast<int>(sheets.size()); }
    int letter_count() const { return static_cast<int>(geometry.affixes.size()); }
    int upper_count() const { return geometry.upper_count; }

    Hemisphere letter_hemisphere(int letter) const {
        return letter < geometry.upper_count ? Hemisphere::Upper : Hemisphere::Lower;
    }
    // Index within the hemisphere, e.g. letter_name(2) == "b1" when
    // upper_count == 2.
    std::string letter_name(int letter) const;
    int letter_index(Hemisphere h, int affix_in_hemisphere) const;
    const BranchAffix& affix(int letter) const {
        return geometry.affixes[static_cast<std::size_t>(letter)];
    }

    AffixOrders orders() const;

    int apply_letter(int letter, int exponent, int sheet) const;
    int apply_word(const Word& w, int sheet) const;

    int find_sheet(const BranchAssignment& a) const;  // -1 when absent
};

SheetAtlas build_atlas(const MatrixFunction& g, const SurfaceConfig& cfg = {});

// Monodromy permutation of a single affix on the finished atlas, with an
// optional non-default loop radius factor (must stay below 0.5).
SheetPermutation monodromy_permutation(const MatrixFunction& g, const SheetAtlas& atlas,
                                       int letter, double radius_factor = 0.0,
                                       const SurfaceConfig& cfg = {});

struct BalanceVerdict {
    bool balanced = false;
    // When unbalanced: a sheet unreachable using only letters of
    // `failing_side`'s hemisphere.
    std::optional<Hemisphere> failing_side;
    int witness_sheet = -1;
};

// Balanced iff the upper-letter orbit and the lower-letter orbit of the
// physical sheet both cover the whole sheet set.
BalanceVerdict is_balanced(const SheetAtlas& atlas);

// Sheets as horizontal rows, affixes as columns, vertical links where an
// affix's permutation connects sheets.
std::string render_text_diagram(const SheetAtlas& atlas);
std::string render_dot_diagram(const SheetAtlas& atlas);

} // namespace wh
