#include "flift/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace flift {

Payoff digital_payoff(double strike) {
    Payoff p;
    p.evaluator = [strike](const Vec& x) { return x(0) > strike ? 1.0 : 0.0; };
    p.lower_bound = 0.0;
    p.label = "digital";
    return p;
}

Payoff call_payoff(double strike) {
    Payoff p;
    p.evaluator = [strike](const Vec& x) { return std::max(0.0, x(0) - strike); };
    p.lower_bound = 0.0;
    p.lipschitz = 1.0;
    p.label = "call";
    return p;
}

Payoff truncated_put_payoff(double strike) {
    Payoff p;
    p.evaluator = [strike](const Vec& x) {
        return std::min(strike, std::max(0.0, strike - x(0)));
    };
    p.lower_bound = 0.0;
    p.lipschitz = 1.0;
    p.label = "truncated_put";
    return p;
}

Payoff linear_payoff(const Vec& slope, double intercept) {
    Payoff p;
    p.evaluator = [slope, intercept](const Vec& x) { return slope.dot(x) + intercept; };
    p.gradient = [slope](const Vec&) { return slope; };
    p.lower_bound = std::numeric_limits<double>::infinity(); // unbounded below; callers restrict domains
    p.lipschitz = slope.norm();
    p.label = "linear";
    return p;
}

Payoff constant_payoff(double c, int) {
    Payoff p;
    p.evaluator = [c](const Vec&) { return c; };
    p.gradient = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
    p.lower_bound = std::max(0.0, -c);
    p.lipschitz = 0.0;
    p.label = "constant";
    return p;
}

Payoff payoff_from_grid(const GridFunction& g, double lower_bound, std::string label) {
    auto shared = std::make_shared<GridFunction>(g);
    Payoff p;
    p.evaluator = [shared](const Vec& x) { return shared->interpolate(x); };
    p.gradient = [shared](const Vec& x) { return shared->gradient(x); };
    p.lower_bound = lower_bound;
    p.label = std::move(label);
    return p;
}

Payoff facelift_closed_form_1d(PayoffKind1d kind, double strike_or_slope,
                               Bound lower, Bound upper) {
    const double kappa = strike_or_slope;
    switch (kind) {
        case PayoffKind1d::digital: {
            if (upper.unbounded) return digital_payoff(kappa); // up-shifts cost +inf
            const double u = upper.value;
            Payoff p;
            p.evaluator = [kappa, u](const Vec& x) {
                if (x(0) > kappa) return 1.0;
                return std::min(1.0, std::max(0.0, 1.0 + u * (x(0) - kappa)));
            };
            p.lower_bound = 0.0;
            p.lipschitz = u;
            p.label = "digital_facelift_ramp";
            return p;
        }
        case PayoffKind1d::call: {
            if (!upper.unbounded && upper.value < 1.0)
                throw UnboundedFacelift("call facelift diverges when u < 1");
            return call_payoff(kappa);
        }
        case PayoffKind1d::truncated_put: {
            if (lower.unbounded || lower.value >= 1.0) return truncated_put_payoff(kappa);
            const double d = lower.value;
            Payoff p;
            p.evaluator = [kappa, d](const Vec& x) {
                return std::min(kappa, std::max(0.0, kappa - d * x(0)));
            };
            p.lower_bound = 0.0;
            p.lipschitz = d;
            p.label = d == 0.0 ? "truncated_put_facelift_const" : "truncated_put_facelift";
            return p;
        }
        case PayoffKind1d::linear: {
            const double s = strike_or_slope;
            const bool ok_up = s <= (upper.unbounded ? std::numeric_limits<double>::infinity()
                                                     : upper.value) + 1e-15;
            const bool ok_dn = -s <= (lower.unbounded ? std::numeric_limits<double>::infinity()
                                                      : lower.value) + 1e-15;
            if (!ok_up || !ok_dn)
                throw UnboundedFacelift("linear facelift diverges when the slope is outside K");
            Vec slope(1);
            slope << s;
            return linear_payoff(slope);
        }
    }
    throw std::logic_error("unreachable");
}

} // namespace flift
