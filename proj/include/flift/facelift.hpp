#pragma once

#include "flift/convex_set.hpp"
#include "flift/grid.hpp"
#include "flift/payoff.hpp"

#include <optional>
#include <string>
#include <vector>

namespace flift {

struct FaceliftOptions {
    /// Shift search confined to |y| <= shift_radius; <= 0 picks the default
    /// rule: grid span + 5 * payoff scale / (min nonzero support slope).
    double shift_radius = 0.0;
    /// Nodes per axis of the y-search grid (odd, so y = 0 is a node).
    int shift_nodes = 201;
    /// delta_K(y) < domain_cap defines the K~ membership test.
    double domain_cap = 1e12;
    /// Facelift values above this cap signal an unbounded facelift.
    double value_cap = 1e9;
    int threads = 0; // 0 = hardware concurrency
};

struct FaceliftResult {
    GridFunction grid;
    /// Some maximizer hit the |y| search boundary; the values are then a
    /// lower bound of the true facelift.
    bool truncated = false;
    double shift_radius_used = 0.0;
};

/// Grid facelift F_K[h](x) = sup over y in K~, |y| <= R, of h(x+y) -
/// delta_K(y). The y = 0 candidate is always included exactly, so the
/// output dominates h at every node. Throws UnboundedFacelift when values
/// exceed the cap.
FaceliftResult facelift_grid(const Payoff& h, const ConstraintSet& set,
                             std::vector<Axis> domain, const FaceliftOptions& opts = {});

/// Lipschitz regularization of Lemma-A.2 type: h_n = (inf-convolution
/// g_n(x) = inf_y h(y) + n|x - y|) capped at n, evaluated on the grid.
/// The candidate set is the grid plus x itself, so h_n <= h holds exactly
/// node-wise and the sequence is nondecreasing in n.
GridFunction lipschitz_regularize(const Payoff& h, int n, std::vector<Axis> domain,
                                  double search_margin = 0.0);

/// Discrete mollification with a compactly supported smooth bump of
/// bandwidth 1/k (tensor-product, weights normalized so constants are
/// preserved exactly). Boundary handled by constant extension. Rejects
/// bandwidths narrower than one grid step.
GridFunction mollify(const GridFunction& f, int bandwidth_k);

struct LawReport {
    double dominance_violation = 0.0;   // max(h - F[h]) (0 means F >= h)
    double monotonicity_violation = 0.0; // h >= g but F[h] < F[g]
    double lattice_violation = 0.0;     // |F[h v g] - F[h] v F[g]|
    double idempotence_violation = 0.0; // |F[F[h]] - F[h]|
    double tolerance = 0.0;             // L * (grid step + y-grid step)
    bool pass = false;
};

/// Check the facelift laws (dominance, monotonicity, lattice, idempotence)
/// for two payoffs on a grid. h >= g is assumed by the caller for the
/// monotonicity leg; the report carries the violations.
LawReport check_facelift_laws(const Payoff& h, const Payoff& g, const ConstraintSet& set,
                              std::vector<Axis> domain, const FaceliftOptions& opts = {});

struct SupersolutionReport {
    double min_constraint_term = 0.0; // min over nodes of C_K(grad F)
    double min_dominance_term = 0.0;  // min over nodes of F - h
    std::vector<int> worst_node;
    double tolerance = 0.0;
    bool pass = false;
};

/// Discrete supersolution check of min{C_K(grad u), u - h} = 0: both
/// branches must be >= -tolerance at every interior node (central
/// difference gradients).
SupersolutionReport supersolution_check(const GridFunction& F, const Payoff& h,
                                        const ConstraintSet& set, double tolerance = 1e-6);

/// Smallest positive support-function slope over probe directions; used by
/// the default shift radius rule. Returns nullopt when every finite support
/// value is zero (free shift directions exist).
std::optional<double> min_support_slope(const ConstraintSet& set);

} // namespace flift
