#include "flift/convex_set.hpp"

#include "flift/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flift {

namespace {

constexpr double kUnitTol = 1e-12;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument("ConstraintSet: " + msg);
}

void require_dim(const ConstraintSet& set, const Vec& v, const char* what) {
    if (static_cast<int>(v.size()) != set.dim())
        throw std::invalid_argument(std::string("dimension mismatch in ") + what);
}

// Enumerate k-subsets of {0..m-1}; visitor returns false to stop early.
template <typename F>
void for_each_subset(int m, int k, F&& visit) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    if (k == 0) { visit(idx); return; }
    while (true) {
        visit(idx);
        int i = k - 1;
        while (i >= 0 && idx[i] == m - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::vector<Vec> enumerate_vertices(const Mat& N, const Vec& c) {
    const int m = static_cast<int>(N.rows());
    const int d = static_cast<int>(N.cols());
    std::vector<Vec> verts;
    for_each_subset(m, d, [&](const std::vector<int>& idx) {
        Mat A(d, d);
        Vec b(d);
        for (int r = 0; r < d; ++r) {
            A.row(r) = N.row(idx[r]);
            b(r) = c(idx[r]);
        }
        Eigen::FullPivLU<Mat> lu(A);
        if (!lu.isInvertible()) return;
        Vec v = lu.solve(b);
        if (((N * v).array() > c.array() + 1e-9).any()) return;
        for (const Vec& w : verts)
            if ((w - v).norm() < 1e-9) return;
        verts.push_back(std::move(v));
    });
    return verts;
}

} // namespace

// ---------------------------------------------------------------------------
// construction / validation

ConstraintSet ConstraintSet::hypercube(std::vector<Bound> lower, std::vector<Bound> upper) {
    require(!lower.empty() && lower.size() == upper.size(),
            "hypercube bounds must be nonempty and of equal size");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!lower[i].unbounded) require(lower[i].value >= 0.0, "hypercube lower bound d_i must be >= 0");
        if (!upper[i].unbounded) require(upper[i].value >= 0.0, "hypercube upper bound u_i must be >= 0");
        require(!std::isinf(lower[i].value) && !std::isinf(upper[i].value),
                "infinite bounds must use the explicit unbounded marker");
    }
    ConstraintSet s;
    s.shape_ = SetShape::hypercube;
    s.dim_ = static_cast<int>(lower.size());
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
}

ConstraintSet ConstraintSet::half_space(const Vec& normal, double offset) {
    require(normal.size() >= 1, "half_space normal must be nonempty");
    require(std::abs(normal.norm() - 1.0) <= kUnitTol, "half_space normal must be unit within 1e-12");
    require(offset >= 0.0, "half_space offset must be >= 0 so that 0 in K");
    ConstraintSet s;
    s.shape_ = SetShape::half_space;
    s.dim_ = static_cast<int>(normal.size());
    s.normal_ = normal;
    s.offset_ = offset;
    return s;
}

ConstraintSet ConstraintSet::hyperplane(const Vec& normal, double offset) {
    require(normal.size() >= 1, "hyperplane normal must be nonempty");
    require(std::abs(normal.norm() - 1.0) <= kUnitTol, "hyperplane normal must be unit within 1e-12");
    require(std::abs(offset) <= kUnitTol, "hyperplane must pass through 0 (offset 0)");
    ConstraintSet s;
    s.shape_ = SetShape::hyperplane;
    s.dim_ = static_cast<int>(normal.size());
    s.normal_ = normal;
    s.offset_ = 0.0;
    return s;
}

ConstraintSet ConstraintSet::l2_ball(const Vec& center, double radius) {
    require(center.size() >= 1, "ball center must be nonempty");
    require(radius > 0.0, "ball radius must be > 0");
    require(center.norm() <= radius + 1e-12, "0 must lie inside the ball");
    ConstraintSet s;
    s.shape_ = SetShape::l2_ball;
    s.dim_ = static_cast<int>(center.size());
    s.center_ = center;
    s.radius_ = radius;
    return s;
}

ConstraintSet ConstraintSet::polytope(const Mat& normals, const Vec& offsets) {
    const int m = static_cast<int>(normals.rows());
    const int d = static_cast<int>(normals.cols());
    require(m >= d + 1, "polytope needs at least d+1 half-spaces to be bounded");
    require(m <= 16, "polytope limited to 16 half-spaces");
    require(d <= 4, "polytope limited to dimension 4");
    require(offsets.size() == m, "polytope offsets size mismatch");
    for (int i = 0; i < m; ++i) {
        require(std::abs(normals.row(i).norm() - 1.0) <= kUnitTol, "polytope rows must be unit normals");
        require(offsets(i) >= 0.0, "polytope offsets must be >= 0 so that 0 in K");
    }
    // bounded iff the normals positively span R^d; probe densely
    for (const Vec& v : sphere_sequence(d, d == 1 ? 2 : (d == 2 ? 256 : 2048))) {
        double best = -1.0;
        for (int i = 0; i < m; ++i) best = std::max(best, normals.row(i).dot(v));
        require(best > 1e-9, "polytope must be bounded; use half_space/hypercube for unbounded sets");
    }
    ConstraintSet s;
    s.shape_ = SetShape::polytope;
    s.dim_ = d;
    s.poly_normals_ = normals;
    s.poly_offsets_ = offsets;
    s.poly_vertices_ = enumerate_vertices(normals, offsets);
    require(!s.poly_vertices_.empty(), "polytope has no vertices");
    return s;
}

std::string ConstraintSet::shape_name() const {
    switch (shape_) {
        case SetShape::hypercube: return "hypercube";
        case SetShape::half_space: return "half_space";
        case SetShape::hyperplane: return "hyperplane";
        case SetShape::l2_ball: return "l2_ball";
        case SetShape::polytope: return "polytope";
    }
    return "?";
}

bool ConstraintSet::is_whole_space() const {
    if (shape_ != SetShape::hypercube) return false;
    for (int i = 0; i < dim_; ++i)
        if (!lower_[i].unbounded || !upper_[i].unbounded) return false;
    return true;
}

bool ConstraintSet::coordinate_pinned(int i) const {
    if (shape_ != SetShape::hypercube) return false;
    return !lower_[i].unbounded && !upper_[i].unbounded &&
           lower_[i].value == 0.0 && upper_[i].value == 0.0;
}

bool ConstraintSet::has_pinned_coordinate() const {
    for (int i = 0; i < dim_; ++i)
        if (coordinate_pinned(i)) return true;
    return false;
}

const std::vector<Bound>& ConstraintSet::lower_bounds() const {
    require(shape_ == SetShape::hypercube, "lower_bounds on wrong shape");
    return lower_;
}
const std::vector<Bound>& ConstraintSet::upper_bounds() const {
    require(shape_ == SetShape::hypercube, "upper_bounds on wrong shape");
    return upper_;
}
const Vec& ConstraintSet::normal() const {
    require(shape_ == SetShape::half_space || shape_ == SetShape::hyperplane, "normal on wrong shape");
    return normal_;
}
double ConstraintSet::offset() const {
    require(shape_ == SetShape::half_space || shape_ == SetShape::hyperplane, "offset on wrong shape");
    return offset_;
}
const Vec& ConstraintSet::center() const {
    require(shape_ == SetShape::l2_ball, "center on wrong shape");
    return center_;
}
double ConstraintSet::radius() const {
    require(shape_ == SetShape::l2_ball, "radius on wrong shape");
    return radius_;
}
const Mat& ConstraintSet::polytope_normals() const {
    require(shape_ == SetShape::polytope, "polytope_normals on wrong shape");
    return poly_normals_;
}
const Vec& ConstraintSet::polytope_offsets() const {
    require(shape_ == SetShape::polytope, "polytope_offsets on wrong shape");
    return poly_offsets_;
}
const std::vector<Vec>& ConstraintSet::polytope_vertices() const {
    require(shape_ == SetShape::polytope, "polytope_vertices on wrong shape");
    return poly_vertices_;
}

ExtReal ConstraintSet::bounding_radius() const {
    switch (shape_) {
        case SetShape::hypercube: {
            double sq = 0.0;
            for (int i = 0; i < dim_; ++i) {
                if (lower_[i].unbounded || upper_[i].unbounded) return ExtReal::infinity();
                sq += std::pow(std::max(lower_[i].value, upper_[i].value), 2);
            }
            return ExtReal(std::sqrt(sq));
        }
        case SetShape::half_space:
        case SetShape::hyperplane:
            return dim_ == 1 && shape_ == SetShape::hyperplane ? ExtReal(0.0) : ExtReal::infinity();
        case SetShape::l2_ball:
            return ExtReal(center_.norm() + radius_);
        case SetShape::polytope: {
            double r = 0.0;
            for (const Vec& v : poly_vertices_) r = std::max(r, v.norm());
            return ExtReal(r);
        }
    }
    return ExtReal(0.0);
}

// ---------------------------------------------------------------------------
// support function

ExtReal support_function(const ConstraintSet& set, const Vec& zeta) {
    require_dim(set, zeta, "support_function");
    switch (set.shape()) {
        case SetShape::hypercube: {
            const auto& lo = set.lower_bounds();
            const auto& up = set.upper_bounds();
            double s = 0.0;
            for (int i = 0; i < set.dim(); ++i) {
                const double z = zeta(i);
                if (z > 0.0) {
                    if (up[i].unbounded) return ExtReal::infinity();
                    s += up[i].value * z;
                } else if (z < 0.0) {
                    if (lo[i].unbounded) return ExtReal::infinity();
                    s += lo[i].value * (-z);
                }
            }
            return ExtReal(s);
        }
        case SetShape::half_space: {
            const double t = set.normal().dot(zeta);
            if (t < 0.0) return ExtReal::infinity();
            if ((zeta - t * set.normal()).norm() > 1e-12 * std::max(1.0, zeta.norm()))
                return ExtReal::infinity();
            return ExtReal(set.offset() * t);
        }
        case SetShape::hyperplane: {
            const double t = set.normal().dot(zeta);
            if ((zeta - t * set.normal()).norm() > 1e-12 * std::max(1.0, zeta.norm()))
                return ExtReal::infinity();
            return ExtReal(set.offset() * t);
        }
        case SetShape::l2_ball:
            return ExtReal(zeta.dot(set.center()) + set.radius() * zeta.norm());
        case SetShape::polytope: {
            double best = -std::numeric_limits<double>::infinity();
            for (const Vec& v : set.polytope_vertices()) best = std::max(best, zeta.dot(v));
            return ExtReal(best);
        }
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// distance and projection

namespace {

Projection project_polytope(const ConstraintSet& set, const Vec& p) {
    const Mat& N = set.polytope_normals();
    const Vec& c = set.polytope_offsets();
    const int m = static_cast<int>(N.rows());
    const int d = set.dim();

    if (((N * p).array() <= c.array() + 1e-12).all())
        return Projection{0.0, p};

    // KKT enumeration over active sets: y = p - N_S^T lambda with
    // N_S y = c_S, lambda >= 0, and y feasible. The projection is the
    // unique such point; fall back to the best feasible candidate.
    Projection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= d; ++k) {
        for_each_subset(m, k, [&](const std::vector<int>& idx) {
            Mat Ns(k, d);
            Vec cs(k);
            for (int r = 0; r < k; ++r) {
                Ns.row(r) = N.row(idx[r]);
                cs(r) = c(idx[r]);
            }
            Mat G = Ns * Ns.transpose();
            Eigen::FullPivLU<Mat> lu(G);
            if (!lu.isInvertible()) return;
            Vec lambda = lu.solve(Ns * p - cs);
            if ((lambda.array() < -1e-10).any()) return;
            Vec y = p - Ns.transpose() * lambda;
            if (((N * y).array() > c.array() + 1e-9).any()) return;
            const double dist = (p - y).norm();
            if (dist < best.distance) best = Projection{dist, y};
        });
    }
    if (!std::isfinite(best.distance))
        throw std::runtime_error("polytope projection failed");
    return best;
}

} // namespace

Projection distance_and_project(const ConstraintSet& set, const Vec& p) {
    require_dim(set, p, "distance_and_project");
    switch (set.shape()) {
        case SetShape::hypercube: {
            const auto& lo = set.lower_bounds();
            const auto& up = set.upper_bounds();
            Vec q = p;
            for (int i = 0; i < set.dim(); ++i) {
                if (!up[i].unbounded) q(i) = std::min(q(i), up[i].value);
                if (!lo[i].unbounded) q(i) = std::max(q(i), -lo[i].value);
            }
            return Projection{(p - q).norm(), q};
        }
        case SetShape::half_space: {
            const double excess = std::max(0.0, set.normal().dot(p) - set.offset());
            Vec q = p - excess * set.normal();
            return Projection{excess, q};
        }
        case SetShape::hyperplane: {
            const double t = set.normal().dot(p) - set.offset();
            Vec q = p - t * set.normal();
            return Projection{std::abs(t), q};
        }
        case SetShape::l2_ball: {
            const Vec r = p - set.center();
            const double nr = r.norm();
            if (nr <= set.radius()) return Projection{0.0, p};
            Vec q = set.center() + (set.radius() / nr) * r;
            return Projection{nr - set.radius(), q};
        }
        case SetShape::polytope:
            return project_polytope(set, p);
    }
    throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// boundary sampling

namespace {

struct HypercubeFacet {
    int coord;
    int side; // +1 upper, -1 lower
};

std::vector<HypercubeFacet> hypercube_facets(const ConstraintSet& set) {
    std::vector<HypercubeFacet> facets;
    const auto& lo = set.lower_bounds();
    const auto& up = set.upper_bounds();
    for (int i = 0; i < set.dim(); ++i) {
        if (set.coordinate_pinned(i)) {
            // degenerate coordinate: both orientations are supporting normals
            facets.push_back({i, +1});
            facets.push_back({i, -1});
            continue;
        }
        if (!up[i].unbounded) facets.push_back({i, +1});
        if (!lo[i].unbounded) facets.push_back({i, -1});
    }
    return facets;
}

} // namespace

std::vector<BoundaryPoint> boundary_sample(const ConstraintSet& set, int count,
                                           std::uint64_t seed,
                                           const BoundarySampleOptions& opts) {
    if (count < 1) throw std::invalid_argument("boundary_sample: count must be >= 1");
    if (set.is_whole_space()) throw std::invalid_argument("boundary_sample: K = R^d has empty boundary");

    const int d = set.dim();
    const double R = opts.truncation_radius;
    RngStream rng(substream_seed(seed, 0x626f756eULL));
    std::vector<BoundaryPoint> out;
    out.reserve(count);

    auto uniform_in = [&](double a, double b) { return a + (b - a) * rng.next_uniform(); };

    switch (set.shape()) {
        case SetShape::hypercube: {
            const auto facets = hypercube_facets(set);
            if (facets.empty())
                throw std::invalid_argument("boundary_sample: hypercube has no finite facet");
            const auto& lo = set.lower_bounds();
            const auto& up = set.upper_bounds();
            for (int s = 0; s < count; ++s) {
                const auto& f = facets[s % facets.size()];
                Vec y(d), n = Vec::Zero(d);
                n(f.coord) = f.side;
                for (int i = 0; i < d; ++i) {
                    if (i == f.coord) {
                        y(i) = f.side > 0 ? up[i].value : -lo[i].value;
                        continue;
                    }
                    double a = lo[i].unbounded ? -R : -lo[i].value;
                    double b = up[i].unbounded ? R : up[i].value;
                    const double margin = opts.edge_margin * (b - a);
                    y(i) = (b - a) <= 0.0 ? a : uniform_in(a + margin, b - margin);
                }
                out.push_back({y, n, BoundaryClass::smooth_unique_normal});
            }
            break;
        }
        case SetShape::half_space: {
            const Frame frame = orthonormal_frame(set.normal());
            for (int s = 0; s < count; ++s) {
                Vec y = set.offset() * set.normal();
                for (int k = 1; k < d; ++k) y += uniform_in(-R, R) * frame.P.col(k);
                out.push_back({y, set.normal(), BoundaryClass::smooth_unique_normal});
            }
            break;
        }
        case SetShape::hyperplane: {
            const Frame frame = orthonormal_frame(set.normal());
            for (int s = 0; s < count; ++s) {
                Vec y = set.offset() * set.normal();
                for (int k = 1; k < d; ++k) y += uniform_in(-R, R) * frame.P.col(k);
                const Vec n = (s % 2 == 0) ? set.normal() : Vec(-set.normal());
                out.push_back({y, n, BoundaryClass::smooth_unique_normal});
            }
            break;
        }
        case SetShape::l2_ball: {
            for (int s = 0; s < count; ++s) {
                Vec v(d);
                do {
                    for (int i = 0; i < d; ++i) v(i) = rng.next_normal();
                } while (v.norm() < 1e-12);
                v.normalize();
                Vec y = set.center() + set.radius() * v;
                out.push_back({y, v, BoundaryClass::smooth_unique_normal});
            }
            break;
        }
        case SetShape::polytope: {
            const Mat& N = set.polytope_normals();
            const Vec& c = set.polytope_offsets();
            const int m = static_cast<int>(N.rows());
            for (int s = 0; s < count; ++s) {
                const int facet = s % m;
                // vertices lying on this facet
                std::vector<const Vec*> fv;
                for (const Vec& v : set.polytope_vertices())
                    if (std::abs(N.row(facet).dot(v) - c(facet)) < 1e-9) fv.push_back(&v);
                if (fv.size() < 1) continue;
                // random convex combination bounded away from the facet edges
                Vec w(static_cast<int>(fv.size()));
                for (int i = 0; i < w.size(); ++i) w(i) = opts.edge_margin + rng.next_uniform();
                w /= w.sum();
                Vec y = Vec::Zero(d);
                for (int i = 0; i < w.size(); ++i) y += w(i) * (*fv[i]);
                out.push_back({y, Vec(N.row(facet).transpose()), BoundaryClass::smooth_unique_normal});
            }
            if (out.empty()) throw std::runtime_error("polytope boundary sampling failed");
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// frames

Frame orthonormal_frame(const Vec& n) {
    if (!is_unit(n)) throw std::invalid_argument("orthonormal_frame: |n| must be 1 within 1e-9");
    const int d = static_cast<int>(n.size());
    Mat P(d, d);
    P.col(0) = n / n.norm();
    std::vector<bool> used(d, false);
    for (int k = 1; k < d; ++k) {
        // canonical vector with the largest component orthogonal to the span;
        // ties broken by lowest index
        int best = -1;
        double best_norm = -1.0;
        for (int i = 0; i < d; ++i) {
            if (used[i]) continue;
            Vec r = Vec::Unit(d, i);
            for (int j = 0; j < k; ++j) r -= P.col(j).dot(Vec::Unit(d, i)) * P.col(j);
            const double nr = r.norm();
            if (nr > best_norm + 1e-15) {
                best_norm = nr;
                best = i;
            }
        }
        Vec r = Vec::Unit(d, best);
        used[best] = true;
        for (int j = 0; j < k; ++j) r -= P.col(j).dot(r) * P.col(j);
        // second Gram-Schmidt pass for orthogonality to 1e-12
        for (int j = 0; j < k; ++j) r -= P.col(j).dot(r) * P.col(j);
        P.col(k) = r / r.norm();
    }
    return Frame{P};
}

// ---------------------------------------------------------------------------
// constraint operator
//
// C_K(p) = inf over unit zeta in K~ of delta_K(zeta) - zeta^T p equals the
// signed distance: the largest inscribed-ball radius at p when p in K, and
// -d_K(p) otherwise (the infimum is attained along the projection
// direction). Hypercube uses the per-coordinate margins directly.

double constraint_operator(const ConstraintSet& set, const Vec& p) {
    require_dim(set, p, "constraint_operator");
    const double inf = std::numeric_limits<double>::infinity();
    switch (set.shape()) {
        case SetShape::hypercube: {
            if (set.is_whole_space()) return inf; // no constraint active
            const auto& lo = set.lower_bounds();
            const auto& up = set.upper_bounds();
            double inside = inf;
            double out_sq = 0.0;
            for (int i = 0; i < set.dim(); ++i) {
                double m = inf;
                if (!up[i].unbounded) m = std::min(m, up[i].value - p(i));
                if (!lo[i].unbounded) m = std::min(m, lo[i].value + p(i));
                inside = std::min(inside, m);
                if (m < 0.0) out_sq += m * m;
            }
            return out_sq > 0.0 ? -std::sqrt(out_sq) : inside;
        }
        case SetShape::half_space:
            return set.offset() - set.normal().dot(p);
        case SetShape::hyperplane:
            return -std::abs(set.normal().dot(p) - set.offset());
        case SetShape::l2_ball:
            return set.radius() - (p - set.center()).norm();
        case SetShape::polytope: {
            const Mat& N = set.polytope_normals();
            const Vec& c = set.polytope_offsets();
            const Vec slack = c - N * p;
            if ((slack.array() >= 0.0).all()) return slack.minCoeff();
            return -distance_and_project(set, p).distance;
        }
    }
    throw std::logic_error("unreachable");
}

std::vector<Vec> sphere_sequence(int dim, int count) {
    std::vector<Vec> dirs;
    dirs.reserve(count);
    if (dim == 1) {
        dirs.push_back(Vec::Constant(1, 1.0));
        if (count > 1) dirs.push_back(Vec::Constant(1, -1.0));
        return dirs;
    }
    if (dim == 2) {
        for (int i = 0; i < count; ++i) {
            const double a = 2.0 * std::numbers::pi * i / count;
            Vec v(2);
            v << std::cos(a), std::sin(a);
            dirs.push_back(v);
        }
        return dirs;
    }
    // d >= 3: map a Halton-like low-discrepancy sequence through the
    // inverse of the Gaussian radial map (per-coordinate quantiles), then
    // normalize. Deterministic and roughly uniform for our purposes.
    RngStream rng(0x73706872ULL); // fixed stream: sequence is part of the contract
    for (int i = 0; i < count; ++i) {
        Vec v(dim);
        do {
            for (int k = 0; k < dim; ++k) v(k) = rng.next_normal();
        } while (v.norm() < 1e-12);
        dirs.push_back(v.normalized());
    }
    return dirs;
}

GridInfimum constraint_operator_grid(const ConstraintSet& set, const Vec& p,
                                     int direction_grid) {
    require_dim(set, p, "constraint_operator_grid");
    if (set.dim() >= 2 && direction_grid < 2)
        throw std::invalid_argument("constraint_operator_grid: direction_grid must be >= 2");
    const auto dirs = sphere_sequence(set.dim(), set.dim() == 1 ? 2 : direction_grid);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& zeta : dirs) {
        const ExtReal s = support_function(set, zeta);
        if (!s.is_finite()) continue;
        best = std::min(best, s.value() - zeta.dot(p));
    }
    GridInfimum g;
    g.value = best;
    // Lipschitz bound of zeta -> delta(zeta) - zeta^T p over the sphere,
    // times the covering radius of the direction grid.
    const ExtReal rad = set.bounding_radius();
    const double lip = (rad.is_finite() ? rad.value() : 1e6) + p.norm();
    const double covering = set.dim() == 1 ? 0.0
                          : std::numbers::pi / std::max(1, direction_grid) *
                                (set.dim() == 2 ? 1.0 : 4.0 * std::sqrt(static_cast<double>(set.dim())));
    g.discretization_bound = lip * covering;
    return g;
}

} // namespace flift
