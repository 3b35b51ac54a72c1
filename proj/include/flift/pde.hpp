#pragma once

#include "flift/grid.hpp"
#include "flift/model.hpp"

#include <optional>
#include <vector>

namespace flift {

struct PdeOptions {
    int time_steps = 256;
    double theta = 0.5;      // 0 explicit, 1 implicit, 0.5 Crank-Nicolson
    int rannacher_steps = 2; // fully implicit startup steps for kinked terminals
    std::optional<Vec> eval_point; // boundary-influence diagnostic anchor
};

struct PdeDiagnostics {
    double cfl = 0.0;                 // max a dtau / dx^2 (explicit-part scale)
    double boundary_influence = 0.0;  // Gaussian tail mass beyond the box at eval_point
};

/// Backward solution of L_sigma u = 0 with terminal data: time slices on
/// [t, T], uniform in time, slice index 0 at t and time_steps at T.
class PdeSolution {
public:
    PdeSolution(std::vector<double> times, std::vector<GridFunction> slices,
                PdeDiagnostics diag)
        : times_(std::move(times)), slices_(std::move(slices)), diag_(diag) {}

    const std::vector<double>& times() const { return times_; }
    const std::vector<GridFunction>& slices() const { return slices_; }
    const PdeDiagnostics& diagnostics() const { return diag_; }

    /// Slice index whose time matches t within tolerance; throws otherwise.
    int slice_index(double t, double tol = 1e-9) const;
    const GridFunction& slice_at(double t) const { return slices_[slice_index(t)]; }

    double value(double t, const Vec& x) const { return slice_at(t).interpolate(x); }
    Vec gradient(double t, const Vec& x) const { return slice_at(t).gradient(x); }

private:
    std::vector<double> times_;
    std::vector<GridFunction> slices_;
    PdeDiagnostics diag_;
};

/// theta-scheme solver for d in {1, 2}. The operator has no explicit time
/// dependence, so the implicit matrix is factorized once. Far-field
/// boundaries impose vanishing second derivatives (linearity); instability
/// (sup-norm blow-up beyond twice the terminal scale) aborts with an error.
PdeSolution price_pde(const VolatilityModel& model, const GridFunction& terminal,
                      double t, double T, const PdeOptions& opts = {});

} // namespace flift
