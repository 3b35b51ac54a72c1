#pragma once

#include "flift/convex_set.hpp"
#include "flift/pde.hpp"
#include "flift/simulate.hpp"

#include <string>
#include <vector>

namespace flift {

/// Per-path, per-time delta estimates along a bundle.
struct DeltaPath {
    int n_paths = 0;
    int n_times = 0;
    int dim = 0;
    std::vector<double> values;      // [path][time][i]
    std::vector<char> outside_flags; // [path][time]: point left the PDE box
    int excursions = 0;
    std::string estimator; // pde_gradient | tangent_terminal | regression
    std::vector<double> lambda_values; // optional [path][time][i][j] (regression only)

    double value(int p, int m, int i) const {
        return values[(static_cast<std::size_t>(p) * n_times + m) * dim + i];
    }
    Vec delta_vec(int p, int m) const {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v(i) = value(p, m, i);
        return v;
    }
    bool flagged(int p, int m) const {
        return outside_flags[static_cast<std::size_t>(p) * n_times + m] != 0;
    }
};

/// Gradient of the PDE slices interpolated at every path point; bundle
/// times must match PDE slice times. Path points outside the spatial box
/// are flagged per sample (and clamped for the gradient evaluation).
DeltaPath delta_path_pde(const PdeSolution& solution, const PathBundle& bundle);

struct RegressionDeltaOptions {
    bool with_lambda = false;
    int threads = 0;
};

/// Cross-check estimator (never primary): conditional delta by
/// least-squares regression of the tangent-transported terminal gradient
/// (grad X_T  (grad X_s)^{-1})^T grad h(X_T) on quadratic features of X_s.
/// Optionally estimates Lambda = E_s[target dW^T]/dt the same way.
DeltaPath delta_path_regression(const VolatilityModel& model, const PathBundle& bundle,
                                const Payoff& payoff,
                                const RegressionDeltaOptions& opts = {});

struct MembershipStats {
    double max_distance = 0.0;
    double fraction_outside = 0.0; // fraction of valid samples with d_K > tol
    int worst_path = -1;
    int worst_time = -1;
    std::size_t samples = 0;   // valid (unflagged) samples
    std::size_t excluded = 0;  // flagged samples, reported but not counted
    double tolerance = 0.0;
};

/// d_K statistics of the delta samples against the constraint set.
MembershipStats membership_stats(const DeltaPath& deltas, const ConstraintSet& set,
                                 double tol);

} // namespace flift
