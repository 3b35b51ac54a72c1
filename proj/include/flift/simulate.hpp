#pragma once

#include "flift/model.hpp"
#include "flift/payoff.hpp"
#include "flift/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace flift {

/// Euler paths of X with the coupled tangent process. Substreams are keyed
/// by (seed, path index), so bundles are bit-identical for any worker count.
struct PathBundle {
    int n_paths = 0;
    int steps = 0; // M intervals, M+1 time points
    int dim = 0;
    double t0 = 0.0, T = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> times;        // size steps+1
    std::vector<double> states;       // [path][time][i], row-major
    std::vector<double> tangents;     // [path][time][i][l]
    std::vector<int> failed_paths;    // paths aborted on non-finite state
    std::string scheme = "euler";

    double state(int p, int m, int i) const {
        return states[(static_cast<std::size_t>(p) * (steps + 1) + m) * dim + i];
    }
    Vec state_vec(int p, int m) const {
        Vec x(dim);
        for (int i = 0; i < dim; ++i) x(i) = state(p, m, i);
        return x;
    }
    double tangent(int p, int m, int i, int l) const {
        return tangents[((static_cast<std::size_t>(p) * (steps + 1) + m) * dim + i) * dim + l];
    }
    Mat tangent_mat(int p, int m) const {
        Mat g(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int l = 0; l < dim; ++l) g(i, l) = tangent(p, m, i, l);
        return g;
    }
};

struct SimulateOptions {
    int threads = 0;
    bool with_tangents = true;
};

/// Euler scheme for X and the linear Euler scheme for the tangent process.
/// Non-finite states abort the path (recorded in failed_paths), never clip.
PathBundle simulate(const VolatilityModel& model, double t, const Vec& x, double T,
                    int steps, int n_paths, std::uint64_t seed,
                    const SimulateOptions& opts = {});

struct PricingResult {
    double value = 0.0;
    double std_error = 0.0; // 0 for PDE
    std::string method;     // mc | pde_1d | pde_2d
    int n_paths = 0;
    int steps = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo price E[h(X_T)] (streaming; nothing stored per path beyond
/// the payoff sample, summed in path order for bit stability).
PricingResult price_mc(const VolatilityModel& model, const Payoff& payoff, double t,
                       const Vec& x, double T, int steps, int n_paths, std::uint64_t seed,
                       int threads = 0);

struct DeltaEstimate {
    Vec delta;
    Vec std_error;
    int n_paths = 0;
};

/// Tangent-process initial delta E[(grad_x X_T)^T grad h(X_T)]. Requires a
/// payoff gradient; mollify kinked payoffs first.
DeltaEstimate delta_tangent_initial(const VolatilityModel& model, const Payoff& payoff,
                                    double t, const Vec& x, double T, int steps,
                                    int n_paths, std::uint64_t seed, int threads = 0);

/// Flat binary bundle export: int64 header {n_paths, steps, dim, seed},
/// doubles {t0, T}, then times, states, tangents (row-major as stored).
void write_bundle_binary(const PathBundle& bundle, std::ostream& os);

} // namespace flift
