#pragma once

#include "flift/convex_set.hpp"
#include "flift/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flift {

/// Linear BSDE driver F_sigma(x, Lambda)_m = <d_m sigma, Lambda>_F, i.e.
/// sum_j [d_x sigma^{.j}(x)]^T Lambda^{.j}.
Vec driver(const VolatilityModel& model, const Vec& x, const Mat& Lambda);

struct HalfspaceResidual {
    /// Spectral norm of the symmetric pair matrix T_{kl} =
    /// grad_x[nbar_l^T a nbar_k] . n on the tangent space; frame-invariant,
    /// zero exactly when the half-space condition holds. 0 by convention in
    /// d = 1 (empty pair set).
    double residual = 0.0;
    /// Largest |T_{kl}| in the deterministic frame and its (k, l) pair
    /// (1-based tangential indices); diagnostic only.
    double max_abs_entry = 0.0;
    std::pair<int, int> worst_pair{0, 0};
};

/// Residual of the half-space viability condition at (x, n). An explicit
/// frame may replace the deterministic completion (for invariance tests).
HalfspaceResidual halfspace_residual(const VolatilityModel& model, const Vec& x,
                                     const Vec& n,
                                     const std::optional<Frame>& frame = std::nullopt);

/// Girsanov kernel theta(x, n) = sigma^{-1}(x) b with
/// b_j = sum_{i,k} d_k[sigma sigma^T]^{ij} n^i n^k. Throws outside the
/// support of sigma.
Vec girsanov_kernel(const VolatilityModel& model, const Vec& x, const Vec& n);

/// Analytic bound d^{3/2} C2^{-1/2} sup|da| for elliptic models with
/// |sigma| <= C1 and sigma^T sigma >= C2 I; sup|da| estimated over the grid.
double girsanov_elliptic_bound(const VolatilityModel& model,
                               const std::vector<Vec>& x_grid);

enum class ConditionVerdict { holds_within_tol, violated };

struct ConditionSample {
    Vec x;
    Vec boundary_point;
    Vec normal;
    double residual = 0.0;
    std::pair<int, int> worst_pair{0, 0};
    bool in_support = true;
};

struct ConditionReport {
    double residual_max = 0.0;
    ConditionSample argmax;
    std::vector<ConditionSample> samples;
    ConditionVerdict verdict = ConditionVerdict::holds_within_tol;
    double tolerance = 0.0;
    /// max over sampled symmetric gamma with gamma n = 0, |gamma|_F = 1 of
    /// |n^T F_sigma(x, gamma sigma(x))|; the epsilon family and the top
    /// eigenvector are always in the sample.
    double gamma_check = 0.0;
    double girsanov_sup = 0.0;
    std::string girsanov_status; // bounded | inconclusive_large | support_excluded
    std::optional<double> girsanov_analytic_bound;
    int points_outside_support = 0;
    bool empty_support = false; // no grid point in Supp(sigma): distinct failure

    bool holds() const { return verdict == ConditionVerdict::holds_within_tol; }
};

struct ConditionOptions {
    int boundary_count = 32;
    std::uint64_t seed = 7;
    /// <= 0 picks the split default: 1e-9 for analytic Jacobians,
    /// 50 * fd_step^2 for finite-difference ones.
    double tolerance = 0.0;
    int gamma_samples = 32;
    double cond_threshold = 1e12;
    double truncation_radius = 10.0;
};

double default_condition_tolerance(const VolatilityModel& model);

/// Evaluate the convex-set first-order viability condition over
/// x_grid x sampled boundary normals. Points outside Supp(sigma) are
/// counted and skipped, never silently dropped.
ConditionReport convex_condition_report(const VolatilityModel& model,
                                        const ConstraintSet& set,
                                        const std::vector<Vec>& x_grid,
                                        const ConditionOptions& opts = {});

struct ProbeRow {
    double epsilon = 0.0;
    double estimate = 0.0;      // n^T Delta_{T-eps} / eps, frozen-coefficient leg
    double std_error = 0.0;
    double regression_estimate = 0.0; // backward least-squares corrector
    double abs_error = 0.0;     // |estimate - limit|
};

struct ProbeResult {
    double limit = 0.0; // n^T F_sigma(x, gamma sigma(x))
    std::vector<ProbeRow> rows;
};

struct ProbeOptions {
    int n_paths = 16384;
    int steps = 32;
    std::uint64_t seed = 99;
    int threads = 0;
    int regression_degree = 2;
};

/// Short-horizon probe of the necessity argument: simulate the linear BSDE
/// on [T - eps, T] with terminal value gamma (X_T - x) and report the
/// estimates of n^T Delta_{T-eps} / eps, which converge to
/// n^T F_sigma(x, gamma sigma(x)) as eps -> 0. gamma must be symmetric with
/// gamma n = 0 (checked to 1e-10 after unit-norm scaling). A common noise
/// sequence across epsilons keeps the error decay monotone.
ProbeResult necessity_probe(const VolatilityModel& model, const Vec& x, const Vec& n,
                            Mat gamma, const std::vector<double>& epsilons, double T,
                            const ProbeOptions& opts = {});

} // namespace flift
