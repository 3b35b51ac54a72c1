#include "flift/facelift.hpp"

#include "flift/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flift {

namespace {

struct ShiftCandidate {
    Vec y;
    double cost; // delta_K(y)
    bool on_boundary;
};

/// y-search grid restricted to K~ and |y| <= R. Coordinates forced to zero
/// by the domain (hypercube coordinates with no admissible shift) are not
/// enumerated, which is the exact reduction for non-tradable assets.
std::vector<ShiftCandidate> shift_candidates(const ConstraintSet& set, double R,
                                             int nodes, double domain_cap) {
    const int d = set.dim();
    std::vector<bool> active(d, true);
    if (set.shape() == SetShape::hypercube) {
        for (int i = 0; i < d; ++i) {
            const bool up_blocked = set.upper_bounds()[i].unbounded;
            const bool dn_blocked = set.lower_bounds()[i].unbounded;
            if (up_blocked && dn_blocked) active[i] = false; // y_i = 0 forced
        }
    }
    if (nodes % 2 == 0) ++nodes; // keep y = 0 on the lattice
    std::vector<double> ticks(nodes);
    for (int i = 0; i < nodes; ++i) ticks[i] = -R + 2.0 * R * i / (nodes - 1);
    ticks[(nodes - 1) / 2] = 0.0;

    std::vector<ShiftCandidate> out;
    std::vector<int> idx(d, 0);
    const double R2 = R * R * (1.0 + 1e-12);
    while (true) {
        Vec y = Vec::Zero(d);
        bool boundary = false;
        for (int i = 0; i < d; ++i) {
            if (!active[i]) continue;
            y(i) = ticks[idx[i]];
            if (idx[i] == 0 || idx[i] == nodes - 1) boundary = true;
        }
        if (y.squaredNorm() <= R2) {
            const ExtReal cost = support_function(set, y);
            if (cost.is_finite() && cost.value() < domain_cap)
                out.push_back({y, cost.value(), boundary});
        }
        int i = d - 1;
        while (i >= 0) {
            if (!active[i]) { --i; continue; }
            if (++idx[i] < nodes) break;
            idx[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
    // ensure the exact y = 0 candidate is present even if all dims inactive
    bool has_zero = false;
    for (const auto& c : out)
        if (c.y.isZero(0.0)) { has_zero = true; break; }
    if (!has_zero) out.push_back({Vec::Zero(d), 0.0, false});
    return out;
}

double default_shift_radius(const Payoff& h, const ConstraintSet& set,
                            const std::vector<Axis>& domain) {
    double span = 0.0;
    for (const Axis& a : domain) span = std::max(span, a.max - a.min);
    double scale = 1.0;
    {
        // crude payoff scale: |h| at the box corners and center
        Vec lo(domain.size()), hi(domain.size());
        for (std::size_t i = 0; i < domain.size(); ++i) { lo(i) = domain[i].min; hi(i) = domain[i].max; }
        scale = std::max({std::abs(h(lo)), std::abs(h(hi)), std::abs(h(0.5 * (lo + hi))), 1.0});
    }
    const auto slope = min_support_slope(set);
    const double s = slope.value_or(1.0);
    return std::min(span + 5.0 * scale / std::max(s, 1e-6), 50.0 * std::max(span, 1.0));
}

} // namespace

std::optional<double> min_support_slope(const ConstraintSet& set) {
    const int d = set.dim();
    std::vector<Vec> probes;
    for (int i = 0; i < d; ++i) {
        probes.push_back(Vec::Unit(d, i));
        probes.push_back(-Vec::Unit(d, i));
    }
    for (const Vec& v : sphere_sequence(d, d == 1 ? 2 : 32)) probes.push_back(v);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& z : probes) {
        const ExtReal s = support_function(set, z);
        if (s.is_finite() && s.value() > 1e-14) best = std::min(best, s.value());
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

FaceliftResult facelift_grid(const Payoff& h, const ConstraintSet& set,
                             std::vector<Axis> domain, const FaceliftOptions& opts) {
    if (static_cast<int>(domain.size()) != set.dim())
        throw std::invalid_argument("facelift_grid: domain/set dimension mismatch");
    const double R = opts.shift_radius > 0.0 ? opts.shift_radius
                                             : default_shift_radius(h, set, domain);
    const auto candidates = shift_candidates(set, R, opts.shift_nodes, opts.domain_cap);

    std::size_t n = 1;
    for (const Axis& a : domain) n *= static_cast<std::size_t>(a.count);
    std::vector<double> values(n, 0.0);
    std::vector<char> hit_boundary(n, 0);
    GridFunction shape(domain, std::vector<double>(n, 0.0));

    // enumerate nodes by flat index; parallel over disjoint ranges
    std::vector<Vec> points(n);
    shape.for_each_node([&](const std::vector<int>& idx, std::size_t flat) {
        points[flat] = shape.node_point(idx);
    });
    parallel_blocks(n, opts.threads, [&](std::size_t b, std::size_t e) {
        Vec xy(set.dim());
        for (std::size_t f = b; f < e; ++f) {
            double best = h(points[f]); // y = 0, cost 0: exact dominance
            bool bd = false;
            for (const auto& c : candidates) {
                xy = points[f] + c.y;
                const double v = h(xy) - c.cost;
                if (v > best) {
                    best = v;
                    bd = c.on_boundary;
                }
            }
            values[f] = best;
            hit_boundary[f] = bd ? 1 : 0;
        }
    });

    for (double v : values)
        if (!(v <= opts.value_cap))
            throw UnboundedFacelift("facelift exceeds the value cap " +
                                    format_double(opts.value_cap));

    FaceliftResult r;
    r.grid = GridFunction(std::move(domain), std::move(values));
    r.truncated = std::any_of(hit_boundary.begin(), hit_boundary.end(),
                              [](char c) { return c != 0; });
    r.shift_radius_used = R;
    return r;
}

GridFunction lipschitz_regularize(const Payoff& h, int n, std::vector<Axis> domain,
                                  double search_margin) {
    if (n < 1) throw std::invalid_argument("lipschitz_regularize: n must be >= 1");
    // candidate y points: the domain grid extended by a margin
    std::vector<Axis> search = domain;
    if (search_margin <= 0.0) {
        double span = 0.0;
        for (const Axis& a : domain) span = std::max(span, a.max - a.min);
        search_margin = 0.5 * span;
    }
    for (Axis& a : search) {
        const double step = a.step();
        const int extra = step > 0.0 ? static_cast<int>(std::ceil(search_margin / step)) : 0;
        a.min -= extra * step;
        a.max += extra * step;
        a.count += 2 * extra;
    }
    GridFunction search_shape(search, std::vector<double>(
        [&] { std::size_t m = 1; for (const Axis& a : search) m *= a.count; return m; }(), 0.0));
    std::vector<Vec> ys;
    ys.reserve(search_shape.size());
    std::vector<double> hy;
    search_shape.for_each_node([&](const std::vector<int>& idx, std::size_t) {
        ys.push_back(search_shape.node_point(idx));
    });
    hy.resize(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) hy[i] = h(ys[i]);

    return GridFunction::fill(std::move(domain), [&](const Vec& x) {
        double g = h(x); // y = x candidate: g_n <= h exactly
        for (std::size_t i = 0; i < ys.size(); ++i)
            g = std::min(g, hy[i] + n * (x - ys[i]).norm());
        return std::min(g, static_cast<double>(n));
    });
}

GridFunction mollify(const GridFunction& f, int bandwidth_k) {
    if (bandwidth_k < 1) throw std::invalid_argument("mollify: bandwidth k must be >= 1");
    const double radius = 1.0 / bandwidth_k;
    GridFunction out = f;
    for (int axis = 0; axis < f.dim(); ++axis) {
        const double step = f.axes()[axis].step();
        if (step <= 0.0) continue;
        const int half = static_cast<int>(std::floor(radius / step));
        if (half < 1)
            throw std::invalid_argument("mollify: bandwidth narrower than one grid step");
        // discrete bump weights, normalized so constants are exact
        std::vector<double> w(2 * half + 1);
        double sum = 0.0;
        for (int j = -half; j <= half; ++j) {
            const double t = j * step / radius;
            w[j + half] = std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
            sum += w[j + half];
        }
        for (double& x : w) x /= sum;

        const GridFunction src = out;
        const int count = f.axes()[axis].count;
        out.for_each_node([&](const std::vector<int>& idx, std::size_t flat) {
            double acc = 0.0;
            std::vector<int> q = idx;
            for (int j = -half; j <= half; ++j) {
                q[axis] = std::clamp(idx[axis] + j, 0, count - 1); // constant extension
                acc += w[j + half] * src.at(q);
            }
            out.values()[flat] = acc;
        });
    }
    return out;
}

LawReport check_facelift_laws(const Payoff& h, const Payoff& g, const ConstraintSet& set,
                              std::vector<Axis> domain, const FaceliftOptions& opts) {
    const auto Fh = facelift_grid(h, set, domain, opts);
    const auto Fg = facelift_grid(g, set, domain, opts);

    Payoff hvg;
    hvg.evaluator = [&h, &g](const Vec& x) { return std::max(h(x), g(x)); };
    hvg.lower_bound = std::min(h.lower_bound, g.lower_bound);
    hvg.label = "max(h,g)";
    const auto Fhvg = facelift_grid(hvg, set, domain, opts);

    const Payoff Fh_payoff = payoff_from_grid(Fh.grid, h.lower_bound, "F[h]");
    const auto FFh = facelift_grid(Fh_payoff, set, domain, opts);

    LawReport rep;
    GridFunction shape = Fh.grid;
    shape.for_each_node([&](const std::vector<int>& idx, std::size_t flat) {
        const Vec x = shape.node_point(idx);
        rep.dominance_violation = std::max(rep.dominance_violation, h(x) - Fh.grid.values()[flat]);
        if (h(x) >= g(x))
            rep.monotonicity_violation =
                std::max(rep.monotonicity_violation,
                         Fg.grid.values()[flat] - Fh.grid.values()[flat]);
        const double lat = std::abs(Fhvg.grid.values()[flat] -
                                    std::max(Fh.grid.values()[flat], Fg.grid.values()[flat]));
        rep.lattice_violation = std::max(rep.lattice_violation, lat);
        rep.idempotence_violation =
            std::max(rep.idempotence_violation,
                     std::abs(FFh.grid.values()[flat] - Fh.grid.values()[flat]));
    });

    const ExtReal rad = set.bounding_radius();
    const double L = rad.is_finite()
                         ? rad.value()
                         : std::max({h.lipschitz.value_or(1.0), g.lipschitz.value_or(1.0), 1.0});
    double gstep = 0.0;
    for (const Axis& a : domain) gstep = std::max(gstep, a.step());
    const double ystep = 2.0 * Fh.shift_radius_used / std::max(1, opts.shift_nodes - 1);
    rep.tolerance = L * (gstep + ystep) + 1e-12;
    rep.pass = rep.dominance_violation <= 0.0 &&
               rep.monotonicity_violation <= rep.tolerance &&
               rep.lattice_violation <= rep.tolerance &&
               rep.idempotence_violation <= rep.tolerance;
    return rep;
}

SupersolutionReport supersolution_check(const GridFunction& F, const Payoff& h,
                                        const ConstraintSet& set, double tolerance) {
    SupersolutionReport rep;
    rep.min_constraint_term = std::numeric_limits<double>::infinity();
    rep.min_dominance_term = std::numeric_limits<double>::infinity();
    rep.tolerance = tolerance;
    F.for_each_node([&](const std::vector<int>& idx, std::size_t flat) {
        for (int i = 0; i < F.dim(); ++i)
            if (idx[i] == 0 || idx[i] == F.axes()[i].count - 1) return; // interior only
        const Vec p = F.gradient_at_node(idx);
        const double ck = constraint_operator(set, p);
        const double dom = F.values()[flat] - h(F.node_point(idx));
        // a supersolution of min{C_K(grad u), u - h} = 0 needs both branches
        // nonnegative; track the worse one
        if (std::min(ck, dom) < std::min(rep.min_constraint_term, rep.min_dominance_term))
            rep.worst_node = idx;
        rep.min_constraint_term = std::min(rep.min_constraint_term, ck);
        rep.min_dominance_term = std::min(rep.min_dominance_term, dom);
    });
    rep.pass = rep.min_constraint_term >= -tolerance && rep.min_dominance_term >= -tolerance;
    return rep;
}

} // namespace flift
