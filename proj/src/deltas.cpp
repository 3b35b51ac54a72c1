#include "flift/deltas.hpp"

#include "flift/parallel.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace flift {

DeltaPath delta_path_pde(const PdeSolution& solution, const PathBundle& bundle) {
    const int d = bundle.dim;
    DeltaPath out;
    out.n_paths = bundle.n_paths;
    out.n_times = bundle.steps + 1;
    out.dim = d;
    out.estimator = "pde_gradient";
    out.values.assign(static_cast<std::size_t>(out.n_paths) * out.n_times * d, 0.0);
    out.outside_flags.assign(static_cast<std::size_t>(out.n_paths) * out.n_times, 0);

    // map bundle times onto PDE slice indices once
    std::vector<int> slice_of(out.n_times);
    for (int m = 0; m < out.n_times; ++m) slice_of[m] = solution.slice_index(bundle.times[m]);

    const auto& axes = solution.slices().front().axes();
    int excursions = 0;
    for (int p = 0; p < out.n_paths; ++p) {
        for (int m = 0; m < out.n_times; ++m) {
            const Vec x = bundle.state_vec(p, m);
            bool outside = false;
            for (int i = 0; i < d; ++i)
                if (x(i) < axes[i].min || x(i) > axes[i].max) outside = true;
            if (outside) {
                out.outside_flags[static_cast<std::size_t>(p) * out.n_times + m] = 1;
                ++excursions;
            }
            const Vec g = solution.slices()[slice_of[m]].gradient(x);
            for (int i = 0; i < d; ++i)
                out.values[(static_cast<std::size_t>(p) * out.n_times + m) * d + i] = g(i);
        }
    }
    out.excursions = excursions;
    return out;
}

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

DeltaPath delta_path_regression(const VolatilityModel& model, const PathBundle& bundle,
                                const Payoff& payoff, const RegressionDeltaOptions& opts) {
    if (!payoff.has_gradient())
        throw std::invalid_argument("delta_path_regression: payoff gradient required");
    if (bundle.tangents.empty())
        throw std::invalid_argument("delta_path_regression: bundle lacks tangents");
    const int d = bundle.dim;
    const int P = bundle.n_paths;
    const int M = bundle.steps;
    const int q = quad_feature_count(d);

    DeltaPath out;
    out.n_paths = P;
    out.n_times = M + 1;
    out.dim = d;
    out.estimator = "regression";
    out.values.assign(static_cast<std::size_t>(P) * (M + 1) * d, 0.0);
    out.outside_flags.assign(static_cast<std::size_t>(P) * (M + 1), 0);
    if (opts.with_lambda)
        out.lambda_values.assign(static_cast<std::size_t>(P) * (M + 1) * d * d, 0.0);

    // terminal gradients once per path
    Mat term_grad(P, d);
    for (int p = 0; p < P; ++p)
        term_grad.row(p) = payoff.gradient(bundle.state_vec(p, M)).transpose();

    const double dt = (bundle.T - bundle.t0) / M;
    Mat A(P, q);
    Eigen::RowVectorXd feat(q);
    for (int m = 0; m <= M; ++m) {
        // pathwise target: (grad X_T (grad X_m)^{-1})^T grad h(X_T)
        Mat target(P, d);
        for (int p = 0; p < P; ++p) {
            const Mat gm = bundle.tangent_mat(p, m);
            const Mat gT = bundle.tangent_mat(p, M);
            const Mat ratio = gT * gm.inverse();
            target.row(p) = (ratio.transpose() * term_grad.row(p).transpose()).transpose();
        }
        if (m == M) {
            for (int p = 0; p < P; ++p)
                for (int i = 0; i < d; ++i)
                    out.values[(static_cast<std::size_t>(p) * (M + 1) + m) * d + i] =
                        target(p, i);
            continue;
        }
        if (m == 0) {
            const Vec mean = target.colwise().mean();
            for (int p = 0; p < P; ++p)
                for (int i = 0; i < d; ++i)
                    out.values[(static_cast<std::size_t>(p) * (M + 1)) * d + i] = mean(i);
        } else {
            for (int p = 0; p < P; ++p) {
                quad_features(bundle.state_vec(p, m), feat);
                A.row(p) = feat;
            }
            const auto qr = A.colPivHouseholderQr();
            Mat coef(q, d);
            for (int i = 0; i < d; ++i) coef.col(i) = qr.solve(Vec(target.col(i)));
            for (int p = 0; p < P; ++p) {
                quad_features(bundle.state_vec(p, m), feat);
                const Eigen::RowVectorXd fitted = feat * coef;
                for (int i = 0; i < d; ++i)
                    out.values[(static_cast<std::size_t>(p) * (M + 1) + m) * d + i] =
                        fitted(i);
            }
        }
        if (opts.with_lambda) {
            // Lambda_m ~ E_m[target dW^T] / dt, with dW recovered from the step
            Mat dW(P, d);
            for (int p = 0; p < P; ++p) {
                const Vec xm = bundle.state_vec(p, m);
                const Vec xm1 = bundle.state_vec(p, m + 1);
                dW.row(p) = model.sigma(xm).fullPivLu().solve(xm1 - xm).transpose();
            }
            if (m == 0) {
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        const double lam =
                            (target.col(i).array() * dW.col(j).array()).mean() / dt;
                        for (int p = 0; p < P; ++p)
                            out.lambda_values[((static_cast<std::size_t>(p) * (M + 1) + m) * d +
                                               i) * d + j] = lam;
                    }
            } else {
                for (int p = 0; p < P; ++p) {
                    quad_features(bundle.state_vec(p, m), feat);
                    A.row(p) = feat;
                }
                const auto qr = A.colPivHouseholderQr();
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) {
                        const Vec coef =
                            qr.solve(Vec(target.col(i).cwiseProduct(dW.col(j)) / dt));
                        for (int p = 0; p < P; ++p) {
                            quad_features(bundle.state_vec(p, m), feat);
                            out.lambda_values[((static_cast<std::size_t>(p) * (M + 1) + m) * d +
                                               i) * d + j] = feat * coef;
                        }
                    }
            }
        }
    }
    return out;
}

MembershipStats membership_stats(const DeltaPath& deltas, const ConstraintSet& set,
                                 double tol) {
    if (deltas.dim != set.dim())
        throw std::invalid_argument("membership_stats: dimension mismatch");
    MembershipStats st;
    st.tolerance = tol;
    std::size_t outside = 0;
    for (int p = 0; p < deltas.n_paths; ++p) {
        for (int m = 0; m < deltas.n_times; ++m) {
            if (deltas.flagged(p, m)) {
                ++st.excluded;
                continue;
            }
            ++st.samples;
            const double d = distance_and_project(set, deltas.delta_vec(p, m)).distance;
            if (d > st.max_distance) {
                st.max_distance = d;
                st.worst_path = p;
                st.worst_time = m;
            }
            if (d > tol) ++outside;
        }
    }
    st.fraction_outside = st.samples > 0 ? static_cast<double>(outside) / st.samples : 0.0;
    return st;
}

} // namespace flift
