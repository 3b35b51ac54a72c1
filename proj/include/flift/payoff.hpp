#pragma once

#include "flift/convex_set.hpp"
#include "flift/grid.hpp"
#include "flift/linalg.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace flift {

/// Terminal claim h with optional gradient and the (Hh)-style metadata:
/// a declared lower bound (h >= -lower_bound everywhere) and an optional
/// Lipschitz constant.
struct Payoff {
    std::function<double(const Vec&)> evaluator;
    std::function<Vec(const Vec&)> gradient; // may be empty
    double lower_bound = 0.0;                // m_h
    std::optional<double> lipschitz;
    std::string label;

    double operator()(const Vec& x) const { return evaluator(x); }
    bool has_gradient() const { return static_cast<bool>(gradient); }
};

// --- canonical 1D payoffs ---------------------------------------------------

Payoff digital_payoff(double strike);            // 1_{x > strike}
Payoff call_payoff(double strike);               // (x - strike)^+
Payoff truncated_put_payoff(double strike);      // min(strike, (strike - x)^+)
Payoff linear_payoff(const Vec& slope, double intercept = 0.0);
Payoff constant_payoff(double c, int dim);

/// Wrap a grid function (e.g. a mollified facelift) as a payoff; the
/// gradient interpolates node-wise central differences.
Payoff payoff_from_grid(const GridFunction& g, double lower_bound, std::string label);

enum class PayoffKind1d { digital, call, truncated_put, linear };

/// Thrown when the facelift supremum diverges (e.g. a slope outside K).
struct UnboundedFacelift : std::runtime_error {
    explicit UnboundedFacelift(const std::string& what) : std::runtime_error(what) {}
};

/// Analytic facelift of the canonical 1D payoffs for the interval
/// K = [-d, u] (infinite bounds via the Bound marker):
///   digital       -> min(1, (1 + u (x - strike))^+) for x < strike, 1 beyond
///                    (u infinite leaves the digital unchanged)
///   call          -> unchanged when u >= 1, unbounded otherwise
///   truncated_put -> min(strike, (strike - d x)^+), the d = 0 case being
///                    the constant strike
///   linear        -> unchanged when slope in [-d, u], unbounded otherwise
Payoff facelift_closed_form_1d(PayoffKind1d kind, double strike_or_slope,
                               Bound lower, Bound upper);

} // namespace flift
