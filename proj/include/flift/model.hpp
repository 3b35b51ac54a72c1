#pragma once

#include "flift/expr.hpp"
#include "flift/linalg.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace flift {

enum class ModelFamily { constant, black_scholes, separable, stochvol_counterexample, custom };

/// Local volatility model sigma: R^d -> M_d with its Jacobian tensor and
/// support predicate. Immutable after construction; evaluation is pure.
class VolatilityModel {
public:
    /// sigma(x) = Sigma (Bachelier).
    static VolatilityModel constant(const Mat& Sigma);
    /// sigma(x) = Diag(x) Sigma.
    static VolatilityModel black_scholes(const Mat& Sigma);
    /// sigma(x) = Diag(s_1(x_1),...,s_d(x_d)) L; each s_i is a univariate
    /// expression (variable x1 denotes the asset's own coordinate).
    static VolatilityModel separable(const std::vector<Expr>& sigma_per_asset, const Mat& L);
    /// The clamped stochastic-volatility example:
    ///   sigma = [[ (|x2| ^ sigma_bar) x1, 0 ], [0, eta x2]]
    /// swap_roles exchanges the assets (asset 1 drives asset 2's volatility).
    /// Piecewise C^1: the clamp has a kink at |vol driver| = sigma_bar.
    static VolatilityModel stochvol_counterexample(double sigma_bar, double eta,
                                                   bool swap_roles = false);
    /// Entry-wise expression matrix; Jacobian by symbolic derivative, or
    /// central finite differences when analytic_jacobian is false.
    static VolatilityModel custom(const std::vector<std::vector<Expr>>& entries,
                                  bool analytic_jacobian = false, double fd_step = 1e-4);

    int dim() const { return dim_; }
    ModelFamily family() const { return family_; }
    std::string family_name() const;
    bool analytic_jacobian() const { return analytic_jacobian_; }
    double fd_step() const { return fd_step_; }

    Mat sigma(const Vec& x) const;
    /// jac[k](i,j) = d sigma^{ij} / d x_k.
    MatJacobian jacobian(const Vec& x) const;

    /// Signed distance to the nearest declared kink locus of sigma
    /// (nullopt when the model is C^1 everywhere).
    std::optional<double> kink_distance(const Vec& x) const;

    /// Declared ellipticity constants when known (|sigma| <= C1,
    /// sigma^T sigma >= C2 I); enables the analytic Girsanov bound.
    std::optional<std::pair<double, double>> ellipticity() const { return ellipticity_; }
    void declare_ellipticity(double c1, double c2) { ellipticity_ = {c1, c2}; }

private:
    VolatilityModel() = default;

    MatJacobian fd_jacobian(const Vec& x) const;

    ModelFamily family_ = ModelFamily::constant;
    int dim_ = 0;
    bool analytic_jacobian_ = true;
    double fd_step_ = 1e-4;
    std::function<Mat(const Vec&)> sigma_;
    std::function<MatJacobian(const Vec&)> jacobian_;
    std::function<double(const Vec&)> kink_distance_;
    std::optional<std::pair<double, double>> ellipticity_;
};

/// Diffusion matrix a(x) = sigma(x) sigma(x)^T (symmetrized).
Mat diffusion_matrix(const VolatilityModel& model, const Vec& x);

/// grad_x [ v^T a(x) w ] . n assembled from the Jacobian tensor; symmetric
/// in (v, w) and linear in each argument.
double directional_quadratic_derivative(const VolatilityModel& model, const Vec& x,
                                        const Vec& v, const Vec& w, const Vec& n);

/// x in Supp(sigma): sigma(x) numerically invertible (condition estimate
/// below the threshold).
bool is_in_support(const VolatilityModel& model, const Vec& x, double cond_threshold = 1e12);

} // namespace flift
