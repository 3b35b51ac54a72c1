#pragma once

#include "flift/extended_real.hpp"
#include "flift/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flift {

/// One-sided bound of a hypercube coordinate. Infinite bounds carry an
/// explicit flag, never a sentinel float.
struct Bound {
    double value = 0.0;
    bool unbounded = false;

    static Bound finite(double v) { return Bound{v, false}; }
    static Bound infinite() { return Bound{0.0, true}; }
};

enum class SetShape { hypercube, half_space, hyperplane, l2_ball, polytope };

enum class BoundaryClass { smooth_unique_normal, vertex_or_edge };

struct BoundaryPoint {
    Vec point;
    Vec normal; // unit, outward
    BoundaryClass classification = BoundaryClass::smooth_unique_normal;
};

/// Orthonormal frame attached to a unit normal n: P orthogonal, P e_1 = n.
/// Columns 2..d span the tangent hyperplane.
struct Frame {
    Mat P;

    Vec normal() const { return P.col(0); }
    int dim() const { return static_cast<int>(P.rows()); }

    /// Symmetric basis element eps_{kl} = nbar_l nbar_k^T + nbar_k nbar_l^T
    /// for tangential columns, 1-based tangential indices 1 <= k <= l <= d-1.
    Mat tangential_pair(int k, int l) const {
        const Vec a = P.col(k);
        const Vec b = P.col(l);
        return b * a.transpose() + a * b.transpose();
    }
};

/// Closed convex constraint set K containing 0, given by shape.
///
/// Construction validates the invariants (0 in K, unit normals, nonneg
/// hypercube bounds) and throws std::invalid_argument on violation.
class ConstraintSet {
public:
    static ConstraintSet hypercube(std::vector<Bound> lower, std::vector<Bound> upper);
    static ConstraintSet half_space(const Vec& normal, double offset);
    static ConstraintSet hyperplane(const Vec& normal, double offset);
    static ConstraintSet l2_ball(const Vec& center, double radius);
    /// Bounded polytope  {y : N y <= c}  with unit rows of N and c >= 0.
    /// Unbounded geometries must use the dedicated shapes instead.
    static ConstraintSet polytope(const Mat& normals, const Vec& offsets);

    SetShape shape() const { return shape_; }
    int dim() const { return dim_; }
    std::string shape_name() const;

    /// True when K = R^d (hypercube with every bound unbounded).
    bool is_whole_space() const;
    /// Coordinates pinned to a single value (hypercube with d_i = u_i = 0).
    bool has_pinned_coordinate() const;
    bool coordinate_pinned(int i) const;

    // shape accessors (throw when the shape does not match)
    const std::vector<Bound>& lower_bounds() const;
    const std::vector<Bound>& upper_bounds() const;
    const Vec& normal() const;
    double offset() const;
    const Vec& center() const;
    double radius() const;
    const Mat& polytope_normals() const;
    const Vec& polytope_offsets() const;
    const std::vector<Vec>& polytope_vertices() const;

    /// sup |k| over K; +inf tag for unbounded sets.
    ExtReal bounding_radius() const;

private:
    ConstraintSet() = default;

    SetShape shape_ = SetShape::hypercube;
    int dim_ = 0;
    // hypercube
    std::vector<Bound> lower_, upper_;
    // half_space / hyperplane
    Vec normal_;
    double offset_ = 0.0;
    // ball
    Vec center_;
    double radius_ = 0.0;
    // polytope
    Mat poly_normals_;
    Vec poly_offsets_;
    std::vector<Vec> poly_vertices_;
};

/// Support function delta_K(zeta) = sup_{y in K} zeta^T y; +inf tag exactly
/// when zeta lies outside the domain K~.
ExtReal support_function(const ConstraintSet& set, const Vec& zeta);

struct Projection {
    double distance = 0.0;
    Vec point;
};

/// Euclidean distance to K and the (unique) projection point.
Projection distance_and_project(const ConstraintSet& set, const Vec& p);

inline bool contains(const ConstraintSet& set, const Vec& p, double tol = 1e-9) {
    return distance_and_project(set, p).distance <= tol;
}

struct BoundarySampleOptions {
    double truncation_radius = 10.0; // patch half-width for unbounded facets
    double edge_margin = 1e-3;       // relative margin keeping samples off edges
};

/// Deterministic sample of smooth boundary points with outward normals.
/// Hyperplanes and pinned hypercube coordinates emit both orientations.
std::vector<BoundaryPoint> boundary_sample(const ConstraintSet& set, int count,
                                           std::uint64_t seed,
                                           const BoundarySampleOptions& opts = {});

/// Complete a unit vector n to an orthonormal basis with first column n.
/// Deterministic: canonical basis vectors are inserted in order of
/// decreasing orthogonal component (ties to the lowest index), then
/// Gram-Schmidt.
Frame orthonormal_frame(const Vec& n);

/// Constraint operator C_K(p) = inf over unit zeta in K~ of
/// delta_K(zeta) - zeta^T p. Computed in closed form via the signed
/// distance identity (see notes in the implementation); +inf for K = R^d.
double constraint_operator(const ConstraintSet& set, const Vec& p);

struct GridInfimum {
    double value = 0.0;
    double discretization_bound = 0.0; // |grid inf - true inf| bound estimate
};

/// Direction-grid evaluation of C_K used as a cross-check of the closed
/// form. d = 1 enumerates zeta = +-1; d >= 2 uses a deterministic
/// low-discrepancy sphere sequence of the given size.
GridInfimum constraint_operator_grid(const ConstraintSet& set, const Vec& p,
                                     int direction_grid);

/// Deterministic low-discrepancy sequence of unit vectors (d >= 1).
std::vector<Vec> sphere_sequence(int dim, int count);

} // namespace flift
