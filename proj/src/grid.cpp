#include "flift/grid.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace flift {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

GridFunction::GridFunction(std::vector<Axis> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
    std::size_t n = 1;
    for (const Axis& a : axes_) {
        if (a.count < 1) throw std::invalid_argument("GridFunction: axis count must be >= 1");
        if (a.count > 1 && a.step() <= 0.0)
            throw std::invalid_argument("GridFunction: grid steps must be > 0");
        n *= static_cast<std::size_t>(a.count);
    }
    if (values_.size() != n) throw std::invalid_argument("GridFunction: value count mismatch");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: values must be finite");
    strides_.assign(axes_.size(), 1);
    for (int i = static_cast<int>(axes_.size()) - 2; i >= 0; --i)
        strides_[i] = strides_[i + 1] * static_cast<std::size_t>(axes_[i + 1].count);
}

GridFunction GridFunction::fill(std::vector<Axis> axes,
                                const std::function<double(const Vec&)>& f) {
    std::size_t n = 1;
    for (const Axis& a : axes) n *= static_cast<std::size_t>(a.count);
    std::vector<double> values(n, 0.0);
    GridFunction g(std::move(axes), std::move(values));
    g.for_each_node([&](const std::vector<int>& idx, std::size_t flat) {
        g.values_[flat] = f(g.node_point(idx));
    });
    return g;
}

std::size_t GridFunction::flat_index(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) f += strides_[i] * static_cast<std::size_t>(idx[i]);
    return f;
}

Vec GridFunction::node_point(const std::vector<int>& idx) const {
    Vec x(dim());
    for (int i = 0; i < dim(); ++i) x(i) = axes_[i].node(idx[i]);
    return x;
}

void GridFunction::for_each_node(
    const std::function<void(const std::vector<int>&, std::size_t)>& fn) const {
    std::vector<int> idx(axes_.size(), 0);
    const std::size_t n = values_.size();
    for (std::size_t flat = 0; flat < n; ++flat) {
        fn(idx, flat);
        for (int i = static_cast<int>(axes_.size()) - 1; i >= 0; --i) {
            if (++idx[i] < axes_[i].count) break;
            idx[i] = 0;
        }
    }
}

double GridFunction::interpolate(const Vec& x) const {
    if (x.size() != dim()) throw std::invalid_argument("interpolate: dimension mismatch");
    // locate cell and weights per axis
    std::vector<int> base(dim());
    std::vector<double> w(dim());
    for (int i = 0; i < dim(); ++i) {
        const Axis& a = axes_[i];
        if (a.count == 1) { base[i] = 0; w[i] = 0.0; continue; }
        double t = (x(i) - a.min) / a.step();
        t = std::clamp(t, 0.0, static_cast<double>(a.count - 1));
        int b = std::min(static_cast<int>(t), a.count - 2);
        base[i] = b;
        w[i] = t - b;
    }
    // accumulate over the 2^d cell corners
    const int corners = 1 << dim();
    double acc = 0.0;
    std::vector<int> idx(dim());
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        for (int i = 0; i < dim(); ++i) {
            const int bit = (c >> i) & 1;
            idx[i] = base[i] + bit;
            if (axes_[i].count == 1) { idx[i] = 0; weight *= bit ? 0.0 : 1.0; }
            else weight *= bit ? w[i] : (1.0 - w[i]);
        }
        if (weight != 0.0) acc += weight * values_[flat_index(idx)];
    }
    return acc;
}

Vec GridFunction::gradient_at_node(const std::vector<int>& idx) const {
    Vec g(dim());
    std::vector<int> lo = idx, hi = idx;
    for (int i = 0; i < dim(); ++i) {
        const Axis& a = axes_[i];
        if (a.count == 1) { g(i) = 0.0; continue; }
        lo[i] = std::max(0, idx[i] - 1);
        hi[i] = std::min(a.count - 1, idx[i] + 1);
        g(i) = (values_[flat_index(hi)] - values_[flat_index(lo)]) / ((hi[i] - lo[i]) * a.step());
        lo[i] = idx[i];
        hi[i] = idx[i];
    }
    return g;
}

Vec GridFunction::gradient(const Vec& x) const {
    if (x.size() != dim()) throw std::invalid_argument("gradient: dimension mismatch");
    std::vector<int> base(dim());
    std::vector<double> w(dim());
    for (int i = 0; i < dim(); ++i) {
        const Axis& a = axes_[i];
        if (a.count == 1) { base[i] = 0; w[i] = 0.0; continue; }
        double t = (x(i) - a.min) / a.step();
        t = std::clamp(t, 0.0, static_cast<double>(a.count - 1));
        int b = std::min(static_cast<int>(t), a.count - 2);
        base[i] = b;
        w[i] = t - b;
    }
    const int corners = 1 << dim();
    Vec acc = Vec::Zero(dim());
    std::vector<int> idx(dim());
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        for (int i = 0; i < dim(); ++i) {
            const int bit = (c >> i) & 1;
            idx[i] = base[i] + bit;
            if (axes_[i].count == 1) { idx[i] = 0; weight *= bit ? 0.0 : 1.0; }
            else weight *= bit ? w[i] : (1.0 - w[i]);
        }
        if (weight != 0.0) acc += weight * gradient_at_node(idx);
    }
    return acc;
}

double GridFunction::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}
double GridFunction::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

void GridFunction::write_csv(std::ostream& os) const {
    for (int i = 0; i < dim(); ++i) os << "x" << (i + 1) << ",";
    os << "value\n";
    for_each_node([&](const std::vector<int>& idx, std::size_t flat) {
        for (int i = 0; i < dim(); ++i) os << format_double(axes_[i].node(idx[i])) << ",";
        os << format_double(values_[flat]) << "\n";
    });
}

std::string GridFunction::header_json() const {
    json axes = json::array();
    for (const Axis& a : axes_)
        axes.push_back({{"min", a.min}, {"max", a.max}, {"count", a.count}, {"step", a.step()}});
    json h{{"kind", "grid_function"}, {"dimension", dim()}, {"axes", axes}};
    return h.dump(2);
}

GridFunction GridFunction::read_csv(std::istream& is, const std::string& header_json) {
    const json h = json::parse(header_json);
    std::vector<Axis> axes;
    for (const auto& a : h.at("axes"))
        axes.push_back(Axis{a.at("min").get<double>(), a.at("max").get<double>(),
                            a.at("count").get<int>()});
    std::string line;
    std::getline(is, line); // header row
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto pos = line.find_last_of(',');
        values.push_back(std::strtod(line.c_str() + pos + 1, nullptr));
    }
    return GridFunction(std::move(axes), std::move(values));
}

} // namespace flift
