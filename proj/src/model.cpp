#include "flift/model.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace flift {

namespace {

MatJacobian zero_jacobian(int d) {
    return MatJacobian(d, Mat::Zero(d, d));
}

} // namespace

VolatilityModel VolatilityModel::constant(const Mat& Sigma) {
    if (Sigma.rows() != Sigma.cols() || Sigma.rows() < 1)
        throw std::invalid_argument("constant model: Sigma must be square");
    VolatilityModel m;
    m.family_ = ModelFamily::constant;
    m.dim_ = static_cast<int>(Sigma.rows());
    m.sigma_ = [Sigma](const Vec&) { return Sigma; };
    const int d = m.dim_;
    m.jacobian_ = [d](const Vec&) { return zero_jacobian(d); };
    return m;
}

VolatilityModel VolatilityModel::black_scholes(const Mat& Sigma) {
    if (Sigma.rows() != Sigma.cols() || Sigma.rows() < 1)
        throw std::invalid_argument("black_scholes model: Sigma must be square");
    VolatilityModel m;
    m.family_ = ModelFamily::black_scholes;
    m.dim_ = static_cast<int>(Sigma.rows());
    m.sigma_ = [Sigma](const Vec& x) { return Mat(x.asDiagonal() * Sigma); };
    const int d = m.dim_;
    m.jacobian_ = [Sigma, d](const Vec&) {
        // d sigma^{ij} / d x_k = 1_{i=k} Sigma^{ij}
        MatJacobian jac = zero_jacobian(d);
        for (int k = 0; k < d; ++k) jac[k].row(k) = Sigma.row(k);
        return jac;
    };
    return m;
}

VolatilityModel VolatilityModel::separable(const std::vector<Expr>& sigma_per_asset,
                                           const Mat& L) {
    const int d = static_cast<int>(sigma_per_asset.size());
    if (d < 1) throw std::invalid_argument("separable model: need at least one asset");
    if (L.rows() != d || L.cols() != d)
        throw std::invalid_argument("separable model: L must be d x d");
    for (const Expr& e : sigma_per_asset)
        if (e.min_dimension() > 1)
            throw std::invalid_argument("separable model: sigma_i must be univariate (x1)");
    std::vector<Expr> deriv;
    deriv.reserve(d);
    for (const Expr& e : sigma_per_asset) deriv.push_back(e.derivative(0));

    VolatilityModel m;
    m.family_ = ModelFamily::separable;
    m.dim_ = d;
    m.sigma_ = [sigma_per_asset, L, d](const Vec& x) {
        Vec s(d);
        Vec arg(1);
        for (int i = 0; i < d; ++i) {
            arg(0) = x(i);
            s(i) = sigma_per_asset[i].eval(arg);
        }
        return Mat(s.asDiagonal() * L);
    };
    m.jacobian_ = [deriv, L, d](const Vec& x) {
        MatJacobian jac = zero_jacobian(d);
        Vec arg(1);
        for (int k = 0; k < d; ++k) {
            arg(0) = x(k);
            jac[k].row(k) = deriv[k].eval(arg) * L.row(k);
        }
        return jac;
    };
    return m;
}

VolatilityModel VolatilityModel::stochvol_counterexample(double sigma_bar, double eta,
                                                         bool swap_roles) {
    if (sigma_bar <= 0.0) throw std::invalid_argument("stochvol model: sigma_bar must be > 0");
    // stock = asset with clamped vol, driver = asset feeding the clamp
    const int stock = swap_roles ? 1 : 0;
    const int driver = swap_roles ? 0 : 1;

    VolatilityModel m;
    m.family_ = ModelFamily::stochvol_counterexample;
    m.dim_ = 2;
    m.sigma_ = [=](const Vec& x) {
        Mat s = Mat::Zero(2, 2);
        s(stock, stock) = std::min(std::abs(x(driver)), sigma_bar) * x(stock);
        s(driver, driver) = eta * x(driver);
        return s;
    };
    m.jacobian_ = [=](const Vec& x) {
        MatJacobian jac = zero_jacobian(2);
        const double clamp = std::min(std::abs(x(driver)), sigma_bar);
        jac[stock](stock, stock) = clamp;
        if (std::abs(x(driver)) < sigma_bar)
            jac[driver](stock, stock) = (x(driver) >= 0.0 ? 1.0 : -1.0) * x(stock);
        jac[driver](driver, driver) = eta;
        return jac;
    };
    m.kink_distance_ = [=](const Vec& x) { return std::abs(std::abs(x(driver)) - sigma_bar); };
    return m;
}

VolatilityModel VolatilityModel::custom(const std::vector<std::vector<Expr>>& entries,
                                        bool analytic_jacobian, double fd_step) {
    const int d = static_cast<int>(entries.size());
    if (d < 1) throw std::invalid_argument("custom model: empty entry matrix");
    for (const auto& row : entries)
        if (static_cast<int>(row.size()) != d)
            throw std::invalid_argument("custom model: entry matrix must be square");

    VolatilityModel m;
    m.family_ = ModelFamily::custom;
    m.dim_ = d;
    m.fd_step_ = fd_step;
    m.analytic_jacobian_ = analytic_jacobian;
    m.sigma_ = [entries, d](const Vec& x) {
        Mat s(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s(i, j) = entries[i][j].eval(x);
        return s;
    };
    if (analytic_jacobian) {
        std::vector<std::vector<std::vector<Expr>>> deriv; // [k][i][j]
        deriv.reserve(d);
        for (int k = 0; k < d; ++k) {
            std::vector<std::vector<Expr>> dk;
            for (int i = 0; i < d; ++i) {
                std::vector<Expr> row;
                for (int j = 0; j < d; ++j) row.push_back(entries[i][j].derivative(k));
                dk.push_back(std::move(row));
            }
            deriv.push_back(std::move(dk));
        }
        m.jacobian_ = [deriv, d](const Vec& x) {
            MatJacobian jac = zero_jacobian(d);
            for (int k = 0; k < d; ++k)
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) jac[k](i, j) = deriv[k][i][j].eval(x);
            return jac;
        };
    }
    return m;
}

std::string VolatilityModel::family_name() const {
    switch (family_) {
        case ModelFamily::constant: return "constant";
        case ModelFamily::black_scholes: return "black_scholes";
        case ModelFamily::separable: return "separable";
        case ModelFamily::stochvol_counterexample: return "stochvol_counterexample";
        case ModelFamily::custom: return "custom";
    }
    return "?";
}

Mat VolatilityModel::sigma(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("sigma: dimension mismatch");
    return sigma_(x);
}

MatJacobian VolatilityModel::fd_jacobian(const Vec& x) const {
    MatJacobian jac(dim_);
    Vec xp = x, xm = x;
    for (int k = 0; k < dim_; ++k) {
        xp(k) = x(k) + fd_step_;
        xm(k) = x(k) - fd_step_;
        jac[k] = (sigma_(xp) - sigma_(xm)) / (2.0 * fd_step_);
        xp(k) = x(k);
        xm(k) = x(k);
    }
    return jac;
}

MatJacobian VolatilityModel::jacobian(const Vec& x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("jacobian: dimension mismatch");
    if (jacobian_) return jacobian_(x);
    return fd_jacobian(x);
}

std::optional<double> VolatilityModel::kink_distance(const Vec& x) const {
    if (!kink_distance_) return std::nullopt;
    return kink_distance_(x);
}

Mat diffusion_matrix(const VolatilityModel& model, const Vec& x) {
    const Mat s = model.sigma(x);
    Mat a = s * s.transpose();
    return 0.5 * (a + a.transpose());
}

double directional_quadratic_derivative(const VolatilityModel& model, const Vec& x,
                                        const Vec& v, const Vec& w, const Vec& n) {
    const int d = model.dim();
    if (v.size() != d || w.size() != d || n.size() != d)
        throw std::invalid_argument("directional_quadratic_derivative: dimension mismatch");
    const Mat s = model.sigma(x);
    const MatJacobian jac = model.jacobian(x);
    double acc = 0.0;
    for (int k = 0; k < d; ++k) {
        if (n(k) == 0.0) continue;
        const Mat da = jac[k] * s.transpose() + s * jac[k].transpose();
        acc += n(k) * v.dot(da * w);
    }
    return acc;
}

bool is_in_support(const VolatilityModel& model, const Vec& x, double cond_threshold) {
    if (cond_threshold <= 1.0)
        throw std::invalid_argument("is_in_support: cond_threshold must be > 1");
    const Mat s = model.sigma(x);
    Eigen::JacobiSVD<Mat> svd(s);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0) return false;
    return smax / smin < cond_threshold;
}

} // namespace flift
