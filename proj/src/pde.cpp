#include "flift/pde.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

namespace flift {

namespace {

using SparseMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Assemble the spatial operator A = (1/2) sum_{ij} a_ij(x) d2_ij on the
/// tensor grid, and the boundary projector rows (vanishing second
/// derivative along the inward direction; diagonal at corners).
struct Discretization {
    SparseMat A;              // interior rows only; zero on boundary rows
    std::vector<Triplet> bc;  // boundary condition rows of the implicit matrix
    std::vector<char> is_boundary;
    int n = 0;
    double max_diffusion = 0.0; // max eigenvalue of a over the grid
};

Discretization assemble(const VolatilityModel& model, const std::vector<Axis>& axes) {
    const int d = static_cast<int>(axes.size());
    if (d != 1 && d != 2) throw std::invalid_argument("price_pde: d must be 1 or 2");
    for (const Axis& a : axes)
        if (a.count < 3) throw std::invalid_argument("price_pde: need >= 3 nodes per axis");

    Discretization dis;
    const int nx = axes[0].count;
    const int ny = d == 2 ? axes[1].count : 1;
    dis.n = nx * ny;
    dis.is_boundary.assign(dis.n, 0);
    std::vector<Triplet> trip;

    auto flat = [&](int i, int j) { return d == 2 ? i * ny + j : i; };
    const double hx = axes[0].step();
    const double hy = d == 2 ? axes[1].step() : 1.0;

    Vec x(d);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const int row = flat(i, j);
            const bool bx = (i == 0 || i == nx - 1);
            const bool by = d == 2 && (j == 0 || j == ny - 1);
            if (bx || by) {
                dis.is_boundary[row] = 1;
                // second difference along the inward direction = 0
                if (bx && (d == 1 || !by)) {
                    const int s = i == 0 ? 1 : -1;
                    dis.bc.emplace_back(row, row, 1.0);
                    dis.bc.emplace_back(row, flat(i + s, j), -2.0);
                    dis.bc.emplace_back(row, flat(i + 2 * s, j), 1.0);
                } else if (by && !bx) {
                    const int s = j == 0 ? 1 : -1;
                    dis.bc.emplace_back(row, row, 1.0);
                    dis.bc.emplace_back(row, flat(i, j + s), -2.0);
                    dis.bc.emplace_back(row, flat(i, j + 2 * s), 1.0);
                } else {
                    // corner: extrapolate along the diagonal
                    const int sx = i == 0 ? 1 : -1;
                    const int sy = j == 0 ? 1 : -1;
                    dis.bc.emplace_back(row, row, 1.0);
                    dis.bc.emplace_back(row, flat(i + sx, j + sy), -2.0);
                    dis.bc.emplace_back(row, flat(i + 2 * sx, j + 2 * sy), 1.0);
                }
                continue;
            }
            x(0) = axes[0].node(i);
            if (d == 2) x(1) = axes[1].node(j);
            const Mat a = diffusion_matrix(model, x);
            Eigen::SelfAdjointEigenSolver<Mat> eig(a);
            dis.max_diffusion = std::max(dis.max_diffusion, eig.eigenvalues().maxCoeff());

            const double cxx = 0.5 * a(0, 0) / (hx * hx);
            trip.emplace_back(row, flat(i - 1, j), cxx);
            trip.emplace_back(row, flat(i + 1, j), cxx);
            trip.emplace_back(row, row, -2.0 * cxx);
            if (d == 2) {
                const double cyy = 0.5 * a(1, 1) / (hy * hy);
                trip.emplace_back(row, flat(i, j - 1), cyy);
                trip.emplace_back(row, flat(i, j + 1), cyy);
                trip.emplace_back(row, row, -2.0 * cyy);
                const double cxy = a(0, 1) / (4.0 * hx * hy); // 2 * (1/2) a12 d_xy
                if (cxy != 0.0) {
                    trip.emplace_back(row, flat(i + 1, j + 1), cxy);
                    trip.emplace_back(row, flat(i - 1, j - 1), cxy);
                    trip.emplace_back(row, flat(i + 1, j - 1), -cxy);
                    trip.emplace_back(row, flat(i - 1, j + 1), -cxy);
                }
            }
        }
    }
    dis.A.resize(dis.n, dis.n);
    dis.A.setFromTriplets(trip.begin(), trip.end());
    return dis;
}

SparseMat implicit_matrix(const Discretization& dis, double coeff) {
    // rows: interior  I - coeff A;  boundary  second-difference = 0
    SparseMat M(dis.n, dis.n);
    std::vector<Triplet> trip = dis.bc;
    for (int k = 0; k < dis.A.outerSize(); ++k)
        for (SparseMat::InnerIterator it(dis.A, k); it; ++it)
            if (!dis.is_boundary[it.row()])
                trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  -coeff * it.value());
    for (int r = 0; r < dis.n; ++r)
        if (!dis.is_boundary[r]) trip.emplace_back(r, r, 1.0);
    M.setFromTriplets(trip.begin(), trip.end(), [](double a, double b) { return a + b; });
    return M;
}

Vec explicit_rhs(const Discretization& dis, double coeff, const Vec& u) {
    Vec rhs = u + coeff * (dis.A * u);
    for (int r = 0; r < dis.n; ++r)
        if (dis.is_boundary[r]) rhs(r) = 0.0; // boundary rows carry the extrapolation
    return rhs;
}

} // namespace

int PdeSolution::slice_index(double t, double tol) const {
    for (std::size_t i = 0; i < times_.size(); ++i)
        if (std::abs(times_[i] - t) <= tol * (1.0 + std::abs(t))) return static_cast<int>(i);
    throw std::invalid_argument("PdeSolution: no slice at requested time");
}

PdeSolution price_pde(const VolatilityModel& model, const GridFunction& terminal,
                      double t, double T, const PdeOptions& opts) {
    if (!(T > t)) throw std::invalid_argument("price_pde: T must exceed t");
    if (opts.theta < 0.0 || opts.theta > 1.0)
        throw std::invalid_argument("price_pde: theta must be in [0, 1]");
    if (opts.time_steps < 1) throw std::invalid_argument("price_pde: time_steps >= 1");
    if (terminal.dim() != model.dim())
        throw std::invalid_argument("price_pde: terminal/model dimension mismatch");

    const auto& axes = terminal.axes();
    Discretization dis = assemble(model, axes);
    const int M = opts.time_steps;
    const double dtau = (T - t) / M;

    Eigen::SparseLU<SparseMat> lu_theta, lu_impl;
    {
        SparseMat Mi = implicit_matrix(dis, opts.theta * dtau);
        lu_theta.compute(Mi);
        if (lu_theta.info() != Eigen::Success)
            throw std::runtime_error("price_pde: factorization failed");
    }
    const int rann = std::min(opts.rannacher_steps, M);
    if (rann > 0 && opts.theta != 1.0) {
        SparseMat Mi = implicit_matrix(dis, dtau);
        lu_impl.compute(Mi);
        if (lu_impl.info() != Eigen::Success)
            throw std::runtime_error("price_pde: factorization failed (startup)");
    }

    Vec u = Eigen::Map<const Vec>(terminal.values().data(), dis.n);
    const double blow_up = 2.0 * (u.cwiseAbs().maxCoeff() + 1.0);

    std::vector<GridFunction> slices(M + 1, terminal);
    std::vector<double> times(M + 1);
    for (int m = 0; m <= M; ++m) times[m] = t + m * (T - t) / M;
    slices[M] = terminal;

    for (int step = 0; step < M; ++step) {
        const bool startup = step < rann && opts.theta != 1.0;
        const double th = startup ? 1.0 : opts.theta;
        Vec rhs = explicit_rhs(dis, (1.0 - th) * dtau, u);
        u = startup ? lu_impl.solve(rhs) : lu_theta.solve(rhs);
        if (!u.allFinite() || u.cwiseAbs().maxCoeff() > blow_up)
            throw std::runtime_error("price_pde: instability detected (sup-norm blow-up)");
        std::vector<double> vals(u.data(), u.data() + dis.n);
        slices[M - 1 - step] = GridFunction(axes, std::move(vals));
    }

    PdeDiagnostics diag;
    double hmin = axes[0].step();
    if (axes.size() == 2) hmin = std::min(hmin, axes[1].step());
    diag.cfl = dis.max_diffusion * dtau / (hmin * hmin);
    if (opts.eval_point) {
        const Vec& xe = *opts.eval_point;
        const double scale = std::sqrt(std::max(dis.max_diffusion, 1e-300) * (T - t));
        double influence = 0.0;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const double lo = (xe(i) - axes[i].min) / scale;
            const double hi = (axes[i].max - xe(i)) / scale;
            influence += 0.5 * std::erfc(lo / std::sqrt(2.0));
            influence += 0.5 * std::erfc(hi / std::sqrt(2.0));
        }
        diag.boundary_influence = influence;
    }
    return PdeSolution(std::move(times), std::move(slices), diag);
}

} // namespace flift
