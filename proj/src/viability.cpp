#include "flift/viability.hpp"

#include "flift/parallel.hpp"
#include "flift/rng.hpp"
#include "flift/simulate.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flift {

Vec driver(const VolatilityModel& model, const Vec& x, const Mat& Lambda) {
    const int d = model.dim();
    if (Lambda.rows() != d || Lambda.cols() != d)
        throw std::invalid_argument("driver: Lambda must be d x d");
    const MatJacobian jac = model.jacobian(x);
    Vec f(d);
    for (int m = 0; m < d; ++m) f(m) = jac[m].cwiseProduct(Lambda).sum();
    return f;
}

HalfspaceResidual halfspace_residual(const VolatilityModel& model, const Vec& x,
                                     const Vec& n, const std::optional<Frame>& frame) {
    if (!is_unit(n)) throw std::invalid_argument("halfspace_residual: |n| must be 1");
    const int d = model.dim();
    HalfspaceResidual r;
    if (d == 1) return r; // empty pair set
    const Frame F = frame ? *frame : orthonormal_frame(n);

    Mat T(d - 1, d - 1);
    for (int k = 1; k < d; ++k)
        for (int l = k; l < d; ++l) {
            const double v = directional_quadratic_derivative(model, x, F.P.col(l), F.P.col(k), n);
            T(k - 1, l - 1) = v;
            T(l - 1, k - 1) = v;
            if (std::abs(v) > r.max_abs_entry) {
                r.max_abs_entry = std::abs(v);
                r.worst_pair = {k, l};
            }
        }
    Eigen::SelfAdjointEigenSolver<Mat> eig(T);
    r.residual = eig.eigenvalues().cwiseAbs().maxCoeff();
    return r;
}

Vec girsanov_kernel(const VolatilityModel& model, const Vec& x, const Vec& n) {
    if (!is_in_support(model, x))
        throw std::invalid_argument("girsanov_kernel: x outside support of sigma");
    const int d = model.dim();
    const Mat s = model.sigma(x);
    const MatJacobian jac = model.jacobian(x);
    Vec b = Vec::Zero(d);
    for (int k = 0; k < d; ++k) {
        if (n(k) == 0.0) continue;
        const Mat da = jac[k] * s.transpose() + s * jac[k].transpose();
        b += n(k) * da.transpose() * n; // b_j += n_k sum_i da^{ij} n_i
    }
    return s.fullPivLu().solve(b);
}

double girsanov_elliptic_bound(const VolatilityModel& model,
                               const std::vector<Vec>& x_grid) {
    const auto ell = model.ellipticity();
    if (!ell) throw std::invalid_argument("girsanov_elliptic_bound: no declared ellipticity");
    const double c2 = ell->second;
    const int d = model.dim();
    double sup_da = 0.0;
    for (const Vec& x : x_grid) {
        const Mat s = model.sigma(x);
        const MatJacobian jac = model.jacobian(x);
        for (int k = 0; k < d; ++k) {
            const Mat da = jac[k] * s.transpose() + s * jac[k].transpose();
            sup_da = std::max(sup_da, da.cwiseAbs().maxCoeff());
        }
    }
    return std::pow(static_cast<double>(d), 1.5) * sup_da / std::sqrt(c2);
}

double default_condition_tolerance(const VolatilityModel& model) {
    if (model.analytic_jacobian()) return 1e-9;
    return 50.0 * model.fd_step() * model.fd_step();
}

namespace {

/// Sample symmetric gamma with gamma n = 0, |gamma|_F = 1: the epsilon
/// basis family, the top eigenvector of the pair matrix, and random
/// P Dtilde P^T completions (first row/column of Dtilde zero).
std::vector<Mat> gamma_samples(const Frame& F, const VolatilityModel& model, const Vec& x,
                               const Vec& n, int count, RngStream& rng) {
    const int d = F.dim();
    std::vector<Mat> out;
    for (int k = 1; k < d; ++k)
        for (int l = k; l < d; ++l) {
            Mat eps = F.tangential_pair(k, l);
            out.push_back(eps / eps.norm());
        }
    {
        Mat T(d - 1, d - 1);
        for (int k = 1; k < d; ++k)
            for (int l = k; l < d; ++l) {
                const double v =
                    directional_quadratic_derivative(model, x, F.P.col(l), F.P.col(k), n);
                T(k - 1, l - 1) = v;
                T(l - 1, k - 1) = v;
            }
        Eigen::SelfAdjointEigenSolver<Mat> eig(T);
        int which = 0;
        eig.eigenvalues().cwiseAbs().maxCoeff(&which);
        Vec w = Vec::Zero(d);
        for (int k = 1; k < d; ++k) w += eig.eigenvectors()(k - 1, which) * F.P.col(k);
        Mat g = w * w.transpose();
        if (g.norm() > 0.0) out.push_back(g / g.norm());
    }
    while (static_cast<int>(out.size()) < count) {
        Mat D = Mat::Zero(d, d);
        for (int i = 1; i < d; ++i)
            for (int j = i; j < d; ++j) {
                D(i, j) = rng.next_normal();
                D(j, i) = D(i, j);
            }
        Mat g = F.P * D * F.P.transpose();
        g = 0.5 * (g + g.transpose());
        if (g.norm() < 1e-12) continue;
        out.push_back(g / g.norm());
    }
    return out;
}

} // namespace

ConditionReport convex_condition_report(const VolatilityModel& model,
                                        const ConstraintSet& set,
                                        const std::vector<Vec>& x_grid,
                                        const ConditionOptions& opts) {
    if (x_grid.empty()) throw std::invalid_argument("convex_condition_report: empty x_grid");
    if (opts.boundary_count < 1)
        throw std::invalid_argument("convex_condition_report: boundary_count >= 1");
    if (model.dim() != set.dim())
        throw std::invalid_argument("convex_condition_report: model/set dimension mismatch");

    ConditionReport rep;
    rep.tolerance = opts.tolerance > 0.0 ? opts.tolerance : default_condition_tolerance(model);

    BoundarySampleOptions bopts;
    bopts.truncation_radius = opts.truncation_radius;
    const auto boundary = boundary_sample(set, opts.boundary_count, opts.seed, bopts);

    RngStream gamma_rng(substream_seed(opts.seed, 0x67616d6dULL));
    int in_support_count = 0;
    bool girsanov_any = false;

    for (const Vec& x : x_grid) {
        const bool supp = is_in_support(model, x, opts.cond_threshold);
        if (!supp) {
            ++rep.points_outside_support;
            ConditionSample s;
            s.x = x;
            s.in_support = false;
            rep.samples.push_back(std::move(s));
            continue;
        }
        ++in_support_count;
        for (const BoundaryPoint& bp : boundary) {
            const Frame F = orthonormal_frame(bp.normal);
            const HalfspaceResidual hr = halfspace_residual(model, x, bp.normal, F);
            ConditionSample s;
            s.x = x;
            s.boundary_point = bp.point;
            s.normal = bp.normal;
            s.residual = hr.residual;
            s.worst_pair = hr.worst_pair;
            if (hr.residual >= rep.residual_max) {
                rep.residual_max = hr.residual;
                rep.argmax = s;
            }
            rep.samples.push_back(std::move(s));

            if (model.dim() >= 2) {
                const Mat sig = model.sigma(x);
                for (const Mat& g :
                     gamma_samples(F, model, x, bp.normal, opts.gamma_samples, gamma_rng)) {
                    const double v = std::abs(bp.normal.dot(driver(model, x, g * sig)));
                    rep.gamma_check = std::max(rep.gamma_check, v);
                }
            }
            try {
                const Vec theta = girsanov_kernel(model, x, bp.normal);
                rep.girsanov_sup = std::max(rep.girsanov_sup, theta.norm());
                girsanov_any = true;
            } catch (const std::invalid_argument&) {
                // outside support (should not happen after the filter)
            }
        }
    }

    rep.empty_support = in_support_count == 0;
    rep.verdict = rep.residual_max <= rep.tolerance ? ConditionVerdict::holds_within_tol
                                                    : ConditionVerdict::violated;
    if (!girsanov_any) rep.girsanov_status = "support_excluded";
    else if (rep.girsanov_sup > 1e8) rep.girsanov_status = "inconclusive_large";
    else rep.girsanov_status = "bounded";
    if (model.ellipticity()) {
        std::vector<Vec> supp_grid;
        for (const Vec& x : x_grid)
            if (is_in_support(model, x, opts.cond_threshold)) supp_grid.push_back(x);
        if (!supp_grid.empty())
            rep.girsanov_analytic_bound = girsanov_elliptic_bound(model, supp_grid);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// necessity probe

namespace {

int quad_feature_count(int d) { return 1 + d + d * (d + 1) / 2; }

void quad_features(const Vec& x, Eigen::RowVectorXd& row) {
    const int d = static_cast<int>(x.size());
    int c = 0;
    row(c++) = 1.0;
    for (int i = 0; i < d; ++i) row(c++) = x(i);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) row(c++) = x(i) * x(j);
}

} // namespace

ProbeResult necessity_probe(const VolatilityModel& model, const Vec& x, const Vec& n,
                            Mat gamma, const std::vector<double>& epsilons, double T,
                            const ProbeOptions& opts) {
    const int d = model.dim();
    if (!is_unit(n)) throw std::invalid_argument("necessity_probe: |n| must be 1");
    gamma = 0.5 * (gamma + gamma.transpose());
    if (gamma.norm() < 1e-14) throw std::invalid_argument("necessity_probe: gamma is zero");
    gamma /= gamma.norm();
    if ((gamma * n).norm() > 1e-10)
        throw std::invalid_argument("necessity_probe: gamma n must vanish (|gamma n| <= 1e-10)");
    for (double eps : epsilons)
        if (!(eps > 0.0) || eps > T)
            throw std::invalid_argument("necessity_probe: epsilons must lie in (0, T]");

    ProbeResult result;
    result.limit = n.dot(driver(model, x, gamma * model.sigma(x)));

    const int M = opts.steps;
    const int P = opts.n_paths;
    const int q = quad_feature_count(d);

    for (double eps : epsilons) {
        // Fresh simulation per epsilon with the same substreams: the noise
        // sequence is shared, so estimates shrink coherently as eps -> 0.
        const double t0 = T - eps;
        PathBundle bundle = simulate(model, t0, x, T, M, P, opts.seed,
                                     SimulateOptions{opts.threads, /*with_tangents=*/false});
        if (!bundle.failed_paths.empty())
            throw std::runtime_error("necessity_probe: non-finite paths in simulation");
        const double dt = eps / M;

        // Frozen-coefficient leg: n^T Delta_{T-eps} = E int n^T F_sigma(X_s,
        // gamma sigma(X_s)) ds (the terminal term n^T gamma (X_T - x)
        // vanishes identically since gamma n = 0).
        std::vector<double> samples(P, 0.0);
        parallel_blocks(P, opts.threads, [&](std::size_t pb, std::size_t pe) {
            for (std::size_t p = pb; p < pe; ++p) {
                double acc = 0.0;
                for (int m = 0; m < M; ++m) {
                    const Vec xs = bundle.state_vec(static_cast<int>(p), m);
                    acc += n.dot(driver(model, xs, gamma * model.sigma(xs))) * dt;
                }
                samples[p] = acc / eps;
            }
        });
        double mean = 0.0;
        for (double s : samples) mean += s;
        mean /= P;
        double var = 0.0;
        for (double s : samples) var += (s - mean) * (s - mean);
        var = P > 1 ? var / (P - 1) : 0.0;

        // Regression corrector: backward least-squares scheme for the full
        // BSDE, Lambda from the Delta x dW regression (one-step features).
        Mat delta(P, d);
        for (int p = 0; p < P; ++p)
            delta.row(p) = (gamma * (bundle.state_vec(p, M) - x)).transpose();
        Mat A(P, q);
        Eigen::RowVectorXd feat_row(q);
        for (int m = M - 1; m >= 0; --m) {
            Mat dW(P, d);
            for (int p = 0; p < P; ++p) {
                const Vec xm = bundle.state_vec(p, m);
                const Vec xm1 = bundle.state_vec(p, m + 1);
                // recover Brownian increments from the Euler step
                const Mat sig = model.sigma(xm);
                dW.row(p) = sig.fullPivLu().solve(xm1 - xm).transpose();
                quad_features(xm, feat_row);
                A.row(p) = feat_row;
            }
            if (m == 0) {
                // deterministic state: conditional expectations are plain means
                Vec dmean = delta.colwise().mean();
                Mat lambda0(d, d);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        lambda0(i, j) = (delta.col(i).array() * dW.col(j).array()).mean() / dt;
                const Vec d0 = dmean + driver(model, x, lambda0) * dt;
                ProbeRow row;
                row.epsilon = eps;
                row.estimate = mean;
                row.std_error = std::sqrt(var / P);
                row.regression_estimate = n.dot(d0) / eps;
                row.abs_error = std::abs(mean - result.limit);
                result.rows.push_back(row);
                break;
            }
            const auto qr = A.colPivHouseholderQr();
            // Lambda(x) ~ E[Delta_{m+1} dW^T | X_m = x] / dt, entrywise
            Mat lambda_coef(q, d * d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    lambda_coef.col(i * d + j) = qr.solve(Vec(delta.col(i).cwiseProduct(dW.col(j)) / dt));
            Mat delta_coef(q, d);
            for (int i = 0; i < d; ++i) delta_coef.col(i) = qr.solve(Vec(delta.col(i)));

            Mat next(P, d);
            parallel_blocks(P, opts.threads, [&](std::size_t pb, std::size_t pe) {
                Eigen::RowVectorXd feat(q);
                Mat lam(d, d);
                for (std::size_t p = pb; p < pe; ++p) {
                    const Vec xm = bundle.state_vec(static_cast<int>(p), m);
                    quad_features(xm, feat);
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) lam(i, j) = feat * lambda_coef.col(i * d + j);
                    const Vec cond = (feat * delta_coef).transpose();
                    next.row(p) = (cond + driver(model, xm, lam) * dt).transpose();
                }
            });
            delta = next;
        }
    }
    return result;
}

} // namespace flift
