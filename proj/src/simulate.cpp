#include "flift/simulate.hpp"

#include "flift/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace flift {

namespace {

struct StepWorkspace {
    Vec x;
    Mat grad;
    Vec dw;
    Mat sig;
    MatJacobian jac;
};

/// One Euler step of the pair (X, grad X); returns false on non-finite state.
bool euler_step(const VolatilityModel& model, double sqdt, RngStream& rng,
                bool with_tangents, StepWorkspace& ws) {
    const int d = model.dim();
    for (int i = 0; i < d; ++i) ws.dw(i) = sqdt * rng.next_normal();
    ws.sig = model.sigma(ws.x);
    if (with_tangents) ws.jac = model.jacobian(ws.x);

    ws.x += ws.sig * ws.dw;
    if (!ws.x.allFinite()) return false;
    if (with_tangents) {
        // d(grad X)^{il} = sum_j sum_k d_k sigma^{ij} (grad X)^{kl} dW^j
        Mat incr = Mat::Zero(d, d);
        for (int j = 0; j < d; ++j) {
            Mat dsig_col(d, d); // (i,k) -> d_k sigma^{ij}
            for (int i = 0; i < d; ++i)
                for (int k = 0; k < d; ++k) dsig_col(i, k) = ws.jac[k](i, j);
            incr += dsig_col * ws.grad * ws.dw(j);
        }
        ws.grad += incr;
        if (!ws.grad.allFinite()) return false;
    }
    return true;
}

} // namespace

PathBundle simulate(const VolatilityModel& model, double t, const Vec& x, double T,
                    int steps, int n_paths, std::uint64_t seed,
                    const SimulateOptions& opts) {
    if (steps < 1 || n_paths < 1) throw std::invalid_argument("simulate: steps, n_paths >= 1");
    if (!(T > t)) throw std::invalid_argument("simulate: T must exceed t");
    if (static_cast<int>(x.size()) != model.dim())
        throw std::invalid_argument("simulate: dimension mismatch");

    const int d = model.dim();
    PathBundle b;
    b.n_paths = n_paths;
    b.steps = steps;
    b.dim = d;
    b.t0 = t;
    b.T = T;
    b.seed = seed;
    b.times.resize(steps + 1);
    const double dt = (T - t) / steps;
    for (int m = 0; m <= steps; ++m) b.times[m] = t + m * dt;
    b.states.assign(static_cast<std::size_t>(n_paths) * (steps + 1) * d, 0.0);
    b.tangents.assign(opts.with_tangents
                          ? static_cast<std::size_t>(n_paths) * (steps + 1) * d * d
                          : 0,
                      0.0);

    std::mutex fail_mutex;
    const double sqdt = std::sqrt(dt);
    parallel_blocks(n_paths, opts.threads, [&](std::size_t pb, std::size_t pe) {
        StepWorkspace ws;
        ws.dw.resize(d);
        std::vector<int> local_failed;
        for (std::size_t p = pb; p < pe; ++p) {
            RngStream rng(substream_seed(seed, p));
            ws.x = x;
            ws.grad = Mat::Identity(d, d);
            auto store = [&](int m) {
                const std::size_t base = (p * (steps + 1) + m) * d;
                for (int i = 0; i < d; ++i) b.states[base + i] = ws.x(i);
                if (opts.with_tangents) {
                    const std::size_t tb = base * d;
                    for (int i = 0; i < d; ++i)
                        for (int l = 0; l < d; ++l) b.tangents[tb + i * d + l] = ws.grad(i, l);
                }
            };
            store(0);
            bool ok = true;
            for (int m = 1; m <= steps; ++m) {
                if (ok) ok = euler_step(model, sqdt, rng, opts.with_tangents, ws);
                if (!ok) break;
                store(m);
            }
            if (!ok) local_failed.push_back(static_cast<int>(p));
        }
        if (!local_failed.empty()) {
            std::lock_guard<std::mutex> lock(fail_mutex);
            b.failed_paths.insert(b.failed_paths.end(), local_failed.begin(), local_failed.end());
        }
    });
    std::sort(b.failed_paths.begin(), b.failed_paths.end());
    return b;
}

PricingResult price_mc(const VolatilityModel& model, const Payoff& payoff, double t,
                       const Vec& x, double T, int steps, int n_paths, std::uint64_t seed,
                       int threads) {
    if (steps < 1 || n_paths < 1) throw std::invalid_argument("price_mc: steps, n_paths >= 1");
    if (!(T > t)) throw std::invalid_argument("price_mc: T must exceed t");
    const int d = model.dim();
    const double dt = (T - t) / steps;
    const double sqdt = std::sqrt(dt);

    std::vector<double> samples(n_paths, 0.0);
    std::vector<char> failed(n_paths, 0);
    parallel_blocks(n_paths, threads, [&](std::size_t pb, std::size_t pe) {
        StepWorkspace ws;
        ws.dw.resize(d);
        for (std::size_t p = pb; p < pe; ++p) {
            RngStream rng(substream_seed(seed, p));
            ws.x = x;
            bool ok = true;
            for (int m = 0; m < steps && ok; ++m)
                ok = euler_step(model, sqdt, rng, /*with_tangents=*/false, ws);
            if (!ok) { failed[p] = 1; continue; }
            samples[p] = payoff(ws.x);
        }
    });
    for (int p = 0; p < n_paths; ++p)
        if (failed[p])
            throw std::runtime_error("price_mc: non-finite path " + std::to_string(p));

    // path-ordered accumulation keeps results independent of worker count
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n_paths;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var = n_paths > 1 ? var / (n_paths - 1) : 0.0;

    PricingResult r;
    r.value = mean;
    r.std_error = std::sqrt(var / n_paths);
    r.method = "mc";
    r.n_paths = n_paths;
    r.steps = steps;
    r.seed = seed;
    return r;
}

DeltaEstimate delta_tangent_initial(const VolatilityModel& model, const Payoff& payoff,
                                    double t, const Vec& x, double T, int steps,
                                    int n_paths, std::uint64_t seed, int threads) {
    if (!payoff.has_gradient())
        throw std::invalid_argument(
            "delta_tangent_initial: payoff gradient unavailable; mollify first "
            "(facelift::mollify) or supply an analytic gradient");
    const int d = model.dim();
    const double dt = (T - t) / steps;
    const double sqdt = std::sqrt(dt);

    std::vector<Vec> samples(n_paths, Vec::Zero(d));
    std::vector<char> failed(n_paths, 0);
    parallel_blocks(n_paths, threads, [&](std::size_t pb, std::size_t pe) {
        StepWorkspace ws;
        ws.dw.resize(d);
        for (std::size_t p = pb; p < pe; ++p) {
            RngStream rng(substream_seed(seed, p));
            ws.x = x;
            ws.grad = Mat::Identity(d, d);
            bool ok = true;
            for (int m = 0; m < steps && ok; ++m)
                ok = euler_step(model, sqdt, rng, /*with_tangents=*/true, ws);
            if (!ok) { failed[p] = 1; continue; }
            samples[p] = ws.grad.transpose() * payoff.gradient(ws.x);
        }
    });
    for (int p = 0; p < n_paths; ++p)
        if (failed[p])
            throw std::runtime_error("delta_tangent_initial: non-finite path " +
                                     std::to_string(p));

    Vec mean = Vec::Zero(d);
    for (const Vec& s : samples) mean += s;
    mean /= n_paths;
    Vec var = Vec::Zero(d);
    for (const Vec& s : samples) var += (s - mean).cwiseAbs2();
    if (n_paths > 1) var /= (n_paths - 1);

    DeltaEstimate e;
    e.delta = mean;
    e.std_error = (var / n_paths).cwiseSqrt();
    e.n_paths = n_paths;
    return e;
}

void write_bundle_binary(const PathBundle& b, std::ostream& os) {
    const std::int64_t header[4] = {b.n_paths, b.steps, b.dim,
                                    static_cast<std::int64_t>(b.seed)};
    os.write(reinterpret_cast<const char*>(header), sizeof(header));
    const double span[2] = {b.t0, b.T};
    os.write(reinterpret_cast<const char*>(span), sizeof(span));
    auto dump = [&os](const std::vector<double>& v) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    dump(b.times);
    dump(b.states);
    dump(b.tangents);
}

} // namespace flift
