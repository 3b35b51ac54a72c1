#include "flift/superrep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flift {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

namespace {
double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}
} // namespace

double black_scholes_call_price(double x, double strike, double vol, double T) {
    if (x <= 0.0 || strike <= 0.0 || vol <= 0.0 || T <= 0.0)
        throw std::invalid_argument("black_scholes_call_price: positive inputs required");
    const double sv = vol * std::sqrt(T);
    const double d1 = (std::log(x / strike) + 0.5 * vol * vol * T) / sv;
    return x * normal_cdf(d1) - strike * normal_cdf(d1 - sv);
}

double black_scholes_call_delta(double x, double strike, double vol, double T) {
    const double sv = vol * std::sqrt(T);
    const double d1 = (std::log(x / strike) + 0.5 * vol * vol * T) / sv;
    return normal_cdf(d1);
}

double bachelier_call_price(double x, double strike, double vol, double T) {
    const double sv = vol * std::sqrt(T);
    const double m = (x - strike) / sv;
    return (x - strike) * normal_cdf(m) + sv * normal_pdf(m);
}

double bachelier_call_delta(double x, double strike, double vol, double T) {
    const double sv = vol * std::sqrt(T);
    return normal_cdf((x - strike) / sv);
}

// ---------------------------------------------------------------------------
// verify_replication_property

namespace {

std::vector<Axis> default_pde_axes(const VolatilityModel& model, const Vec& x0, double t,
                                   double T) {
    const Mat s = model.sigma(x0);
    std::vector<Axis> axes;
    const int nodes = model.dim() == 1 ? 801 : 101;
    for (int i = 0; i < model.dim(); ++i) {
        const double scale = std::max(s.row(i).norm(), 0.05) * std::sqrt(T - t);
        const double hw = 5.0 * scale + 0.25 * std::abs(x0(i));
        axes.push_back(Axis{x0(i) - hw, x0(i) + hw, nodes});
    }
    return axes;
}

bool gradient_in_set(const Payoff& payoff, const ConstraintSet& set,
                     const std::vector<Axis>& axes, double tol = 1e-9) {
    if (!payoff.has_gradient()) return false;
    std::vector<Axis> coarse = axes;
    for (Axis& a : coarse) a.count = std::min(a.count, 9);
    bool ok = true;
    GridFunction probe = GridFunction::fill(coarse, [&](const Vec& x) {
        if (ok && distance_and_project(set, payoff.gradient(x)).distance > tol) ok = false;
        return 0.0;
    });
    (void)probe;
    return ok;
}

} // namespace

VerificationReport verify_replication_property(const VolatilityModel& model,
                                               const ConstraintSet& set,
                                               const Payoff& payoff,
                                               const VerifyConfig& config,
                                               const std::optional<Payoff>& facelift_closed) {
    if (model.dim() != set.dim())
        throw std::invalid_argument("verify_replication_property: model/set dimension mismatch");
    if (static_cast<int>(config.x0.size()) != model.dim())
        throw std::invalid_argument("verify_replication_property: x0 dimension mismatch");

    VerificationReport rep;

    // 1. analytic condition on (sigma, K)
    std::vector<Vec> x_grid = config.x_grid.empty() ? std::vector<Vec>{config.x0} : config.x_grid;
    ConditionOptions copts = config.condition;
    rep.condition = convex_condition_report(model, set, x_grid, copts);

    // 2. facelift of the claim
    const std::vector<Axis> axes =
        config.pde_axes.empty() ? default_pde_axes(model, config.x0, config.t, config.T)
                                : config.pde_axes;
    Payoff lifted;
    if (facelift_closed) {
        lifted = *facelift_closed;
        rep.facelift.mode = "closed_form";
        rep.facelift.label = lifted.label;
    } else if (gradient_in_set(payoff, set, axes)) {
        lifted = payoff; // differentiable h with grad h in K is its own facelift
        rep.facelift.mode = "gradient_in_K";
        rep.facelift.label = payoff.label;
    } else {
        try {
            FaceliftResult fr = facelift_grid(payoff, set, axes, config.facelift);
            rep.facelift.truncated = fr.truncated;
            rep.facelift.shift_radius = fr.shift_radius_used;
            const int bandwidth = std::max(
                2, static_cast<int>(std::ceil(1.0 / (3.0 * axes.front().step()))));
            GridFunction smooth = mollify(fr.grid, bandwidth);
            rep.facelift.mollify_bandwidth = bandwidth;
            lifted = payoff_from_grid(smooth, payoff.lower_bound, payoff.label + "_facelift");
            rep.facelift.mode = "grid";
            rep.facelift.label = lifted.label;
        } catch (const UnboundedFacelift& e) {
            rep.verdict = VerifyVerdict::inconclusive;
            rep.inconclusive_reason = std::string("unbounded facelift: ") + e.what();
            return rep;
        }
    }

    // 3. pricing legs
    rep.replication_price = price_mc(model, lifted, config.t, config.x0, config.T,
                                     config.steps, config.n_paths, config.seed, config.threads);
    rep.lower_bound_price =
        price_mc(model, lifted, config.t, config.x0, config.T, config.steps, config.n_paths,
                 substream_seed(config.seed, 0x6c6f776572ULL), config.threads);
    rep.raw_payoff_price = price_mc(model, payoff, config.t, config.x0, config.T, config.steps,
                                    config.n_paths, config.seed, config.threads);

    std::optional<PdeSolution> pde;
    if (model.dim() <= 2) {
        int pde_steps = config.pde_time_steps;
        if (pde_steps % config.delta_time_points != 0)
            pde_steps = (pde_steps / config.delta_time_points + 1) * config.delta_time_points;
        GridFunction terminal =
            GridFunction::fill(axes, [&](const Vec& x) { return lifted(x); });
        PdeOptions popts;
        popts.time_steps = pde_steps;
        popts.theta = config.pde_theta;
        popts.rannacher_steps = config.rannacher_steps;
        popts.eval_point = config.x0;
        pde = price_pde(model, terminal, config.t, config.T, popts);
        PricingResult pr;
        pr.value = pde->value(config.t, config.x0);
        pr.std_error = 0.0;
        pr.method = model.dim() == 1 ? "pde_1d" : "pde_2d";
        pr.steps = pde_steps;
        rep.pde_price = pr;
    }

    // 4. delta paths and membership (d <= 2)
    if (pde) {
        PathBundle bundle = simulate(model, config.t, config.x0, config.T,
                                     config.delta_time_points, config.delta_paths,
                                     substream_seed(config.seed, 0x64656c74ULL),
                                     SimulateOptions{config.threads, /*with_tangents=*/false});
        // thin PDE slices onto bundle times by construction (multiple steps)
        const int ratio = rep.pde_price->steps / config.delta_time_points;
        std::vector<double> times;
        std::vector<GridFunction> slices;
        for (int m = 0; m <= config.delta_time_points; ++m) {
            times.push_back(pde->times()[m * ratio]);
            slices.push_back(pde->slices()[m * ratio]);
        }
        PdeSolution thin(std::move(times), std::move(slices), pde->diagnostics());
        DeltaPath deltas = delta_path_pde(thin, bundle);
        double grid_bound = 0.0;
        for (const Axis& a : axes) grid_bound = std::max(grid_bound, a.step());
        rep.membership_grid_bound = grid_bound;
        rep.membership =
            membership_stats(deltas, set, config.membership_tol + grid_bound);
    }

    // 5. verdict
    if (!rep.condition.holds()) {
        rep.verdict = VerifyVerdict::condition_violated_gap_expected;
    } else if (rep.facelift.truncated) {
        rep.verdict = VerifyVerdict::inconclusive;
        rep.inconclusive_reason = "facelift search truncated at the shift radius";
    } else if (!rep.membership) {
        rep.verdict = VerifyVerdict::inconclusive;
        rep.inconclusive_reason = "delta paths unavailable in d > 2";
    } else if (rep.membership->fraction_outside <= config.membership_budget) {
        rep.verdict = VerifyVerdict::replication_property_verified;
    } else {
        rep.verdict = VerifyVerdict::inconclusive;
        rep.inconclusive_reason = "membership budget exceeded despite the condition holding";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// counterexample gap

GapResult counterexample_gap(double sigma_bar, const Vec& x, double strike, double T,
                             const GapConfig& config) {
    if (x.size() != 2) throw std::invalid_argument("counterexample_gap: x must be 2-dimensional");
    if (x(0) <= 0.0 || x(1) <= 0.0)
        throw std::invalid_argument("counterexample_gap: start must be positive");
    const VolatilityModel model =
        VolatilityModel::stochvol_counterexample(sigma_bar, config.eta);

    // K = R x {0}: delta_K is finite only on {zeta_1 = 0} where it vanishes,
    // and the claim does not depend on x2, so the facelift is the call itself.
    Payoff call;
    call.evaluator = [strike](const Vec& s) { return std::max(0.0, s(0) - strike); };
    call.lower_bound = 0.0;
    call.lipschitz = 1.0;
    call.label = "call_on_asset1";

    GapResult g;
    g.facelift_price = price_mc(model, call, 0.0, x, T, config.steps, config.n_paths,
                                config.seed, config.threads);
    g.bs_bar_price = black_scholes_call_price(x(0), strike, sigma_bar, T);
    g.gap = g.bs_bar_price - g.facelift_price.value;
    g.std_error = g.facelift_price.std_error;
    return g;
}

// ---------------------------------------------------------------------------
// condition table (the five worked examples)

std::vector<ConditionTableRow> condition_table_examples() {
    std::vector<ConditionTableRow> rows;
    const Mat I2 = Mat::Identity(2, 2);

    auto grid2 = [](std::initializer_list<std::pair<double, double>> pts) {
        std::vector<Vec> g;
        for (const auto& p : pts) {
            Vec v(2);
            v << p.first, p.second;
            g.push_back(v);
        }
        return g;
    };
    const auto default_grid = grid2({{1.0, 1.0}, {0.7, 1.3}, {1.5, 0.6}, {0.9, 0.4}, {1.2, 1.8}});

    // Example 1: non-tradable asset 1, K = {0} x R; the condition reads
    // d1[|s21|^2 + |s22|^2] = 0 (quadratic variation of asset 2 free of x1)
    {
        std::vector<Bound> lo = {Bound::finite(0.0), Bound::infinite()};
        std::vector<Bound> up = {Bound::finite(0.0), Bound::infinite()};
        ConstraintSet K = ConstraintSet::hypercube(lo, up);

        ConditionTableRow bs(VolatilityModel::black_scholes(I2), K);
        bs.name = "example1_non_tradable_black_scholes";
        bs.description = "non-tradable asset 1, Black-Scholes: sigma^{2j} = x2 Sigma^{2j} has "
                         "no x1 dependence";
        bs.x_samples = default_grid;
        bs.expected = ConditionVerdict::holds_within_tol;
        bs.hand_residual = [](const Vec&, const Vec&) { return 0.0; };
        rows.push_back(bs);

        const double sbar = 0.3;
        const double eta = 0.2;
        ConditionTableRow sv(
            VolatilityModel::stochvol_counterexample(sbar, eta, /*swap_roles=*/true), K);
        sv.name = "example1_non_tradable_stochvol_rotated";
        sv.description = "asset 1 drives asset 2's clamped volatility; residual "
                         "|d1[(|x1| ^ sbar)^2 x2^2]| = 2 x1 x2^2 inside the clamp";
        sv.x_samples = grid2({{0.15, 1.0}, {0.1, 0.8}, {0.25, 1.3}, {0.2, 0.5}, {0.05, 1.1}});
        sv.expected = ConditionVerdict::violated;
        sv.hand_residual = [sbar](const Vec& x, const Vec& n) {
            if (std::abs(n(0)) < 0.5) return 0.0; // formula published for n = +-e1
            const double clamp = std::min(std::abs(x(0)), sbar);
            const double slope = std::abs(x(0)) < sbar ? 1.0 : 0.0;
            return std::abs(2.0 * clamp * slope * x(1) * x(1));
        };
        rows.push_back(sv);
    }

    // Example 2: no short sell on both assets, K = [0, inf)^2; same border
    // normals as example 1 plus the second coordinate
    {
        std::vector<Bound> lo = {Bound::finite(0.0), Bound::finite(0.0)};
        std::vector<Bound> up = {Bound::infinite(), Bound::infinite()};
        ConditionTableRow r(VolatilityModel::black_scholes(I2),
                            ConstraintSet::hypercube(lo, up));
        r.name = "example2_no_short_sell_black_scholes";
        r.description = "no short selling either asset under Black-Scholes";
        r.x_samples = default_grid;
        r.expected = ConditionVerdict::holds_within_tol;
        r.hand_residual = [](const Vec&, const Vec&) { return 0.0; };
        rows.push_back(r);
    }

    // Example 3: bound on total number of positions, the lozenge
    // |d1| + |d2| <= C; normals (+-1, +-1)/sqrt(2)
    {
        const double C = 1.0;
        Mat N(4, 2);
        const double s = 1.0 / std::numbers::sqrt2;
        N << s, s, s, -s, -s, s, -s, -s;
        Vec c = Vec::Constant(4, C * s);
        ConditionTableRow r(VolatilityModel::black_scholes(I2),
                            ConstraintSet::polytope(N, c));
        r.name = "example3_lozenge_black_scholes";
        r.description = "total-position bound (lozenge) under Black-Scholes Sigma = I; "
                        "diagonal normals violate the condition";
        r.x_samples = default_grid;
        r.expected = ConditionVerdict::violated;
        r.hand_residual = [](const Vec& x, const Vec& n) {
            // a = diag(x1^2, x2^2), nbar = (-b, a) for n = (a, b):
            // T = grad[b^2 x1^2 + a^2 x2^2] . n = 2 a b (b x1 + a x2)
            return 2.0 * std::abs(n(0) * n(1)) * std::abs(n(1) * x(0) + n(0) * x(1));
        };
        rows.push_back(r);
    }

    // Example 4: Bachelier passes any K
    {
        Mat Sigma(2, 2);
        Sigma << 0.2, 0.05, 0.0, 0.3;
        ConditionTableRow r(VolatilityModel::constant(Sigma),
                            ConstraintSet::l2_ball(Vec::Zero(2), 1.0));
        r.name = "example4_bachelier_ball";
        r.description = "constant volatility satisfies the condition for every convex set";
        r.x_samples = default_grid;
        r.expected = ConditionVerdict::holds_within_tol;
        r.hand_residual = [](const Vec&, const Vec&) { return 0.0; };
        rows.push_back(r);
    }

    // Example 5: multidimensional Black-Scholes, hypercube vs ball
    {
        std::vector<Bound> lo = {Bound::finite(1.0), Bound::finite(1.0)};
        std::vector<Bound> up = {Bound::finite(1.0), Bound::finite(1.0)};
        ConditionTableRow cube(VolatilityModel::black_scholes(I2),
                               ConstraintSet::hypercube(lo, up));
        cube.name = "example5_black_scholes_hypercube";
        cube.description = "hypercube normals are canonical, so the condition holds";
        cube.x_samples = default_grid;
        cube.expected = ConditionVerdict::holds_within_tol;
        cube.hand_residual = [](const Vec&, const Vec&) { return 0.0; };
        rows.push_back(cube);

        ConditionTableRow ball(VolatilityModel::black_scholes(I2),
                               ConstraintSet::l2_ball(Vec::Zero(2), 1.0));
        ball.name = "example5_black_scholes_ball";
        ball.description = "non-canonical ball normals violate the condition "
                           "(residual sqrt(2) at x = (1,1), n = (1,1)/sqrt(2))";
        ball.x_samples = default_grid;
        ball.expected = ConditionVerdict::violated;
        rows.push_back(ball);
    }
    return rows;
}

} // namespace flift
