#pragma once

#include "flift/linalg.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace flift {

/// Uniform axis grid: nodes min, min+step, ..., max (count nodes).
struct Axis {
    double min = 0.0;
    double max = 0.0;
    int count = 0;

    double step() const { return count > 1 ? (max - min) / (count - 1) : 0.0; }
    double node(int i) const { return count > 1 ? min + i * step() : min; }
};

/// Values of a scalar function on a tensor grid, with multilinear
/// interpolation. Storage is row-major in axis order (last axis fastest).
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(std::vector<Axis> axes, std::vector<double> values);

    static GridFunction fill(std::vector<Axis> axes,
                             const std::function<double(const Vec&)>& f);

    int dim() const { return static_cast<int>(axes_.size()); }
    const std::vector<Axis>& axes() const { return axes_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    std::size_t size() const { return values_.size(); }

    std::size_t flat_index(const std::vector<int>& idx) const;
    Vec node_point(const std::vector<int>& idx) const;
    double at(const std::vector<int>& idx) const { return values_[flat_index(idx)]; }
    double& at(const std::vector<int>& idx) { return values_[flat_index(idx)]; }

    /// Multilinear interpolation; clamps to the grid box.
    double interpolate(const Vec& x) const;

    /// Central-difference gradient at an interior node (one-sided at edges).
    Vec gradient_at_node(const std::vector<int>& idx) const;

    /// Gradient field interpolated at an arbitrary point: multilinear
    /// interpolation of the node-wise central-difference gradients.
    Vec gradient(const Vec& x) const;

    double max_value() const;
    double min_value() const;

    /// Visit all node multi-indices in storage order.
    void for_each_node(const std::function<void(const std::vector<int>&, std::size_t)>& fn) const;

    /// CSV: one row per node, coordinates then value, 17 significant digits
    /// (round-trip exact for doubles). JSON header carries the axes.
    void write_csv(std::ostream& os) const;
    std::string header_json() const;
    static GridFunction read_csv(std::istream& is, const std::string& header_json);

private:
    std::vector<Axis> axes_;
    std::vector<double> values_;
    std::vector<std::size_t> strides_;
};

/// Format a double with 17 significant digits (bit-exact round trip).
std::string format_double(double v);

} // namespace flift
