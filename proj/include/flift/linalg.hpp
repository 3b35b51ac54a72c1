#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace flift {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Jacobian of a matrix field sigma: R^d -> M_d, stored by derivative
/// direction: jac[k](i,j) = d sigma^{ij} / d x_k.
using MatJacobian = std::vector<Mat>;

inline bool is_unit(const Vec& n, double tol = 1e-9) {
    return std::abs(n.norm() - 1.0) <= tol;
}

} // namespace flift
