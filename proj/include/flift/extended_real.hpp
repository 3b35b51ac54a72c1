#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flift {

/// Extended real in [-inf, +inf] with an explicit infinity tag.
/// Support-function arithmetic follows the convention (+inf) - finite = +inf,
/// so facelift suprema over restricted domains stay well defined.
class ExtReal {
public:
    ExtReal() = default;
    ExtReal(double v) : value_(v) {
        if (std::isnan(v)) throw std::invalid_argument("ExtReal: NaN");
        if (std::isinf(v)) { infinite_ = true; sign_ = v > 0 ? 1 : -1; value_ = 0.0; }
    }

    static ExtReal infinity() { ExtReal e; e.infinite_ = true; e.sign_ = 1; return e; }
    static ExtReal neg_infinity() { ExtReal e; e.infinite_ = true; e.sign_ = -1; return e; }

    bool is_finite() const { return !infinite_; }
    bool is_pos_infinity() const { return infinite_ && sign_ > 0; }
    bool is_neg_infinity() const { return infinite_ && sign_ < 0; }

    /// Finite value; throws when the tag is set.
    double value() const {
        if (infinite_) throw std::logic_error("ExtReal: value() on infinite");
        return value_;
    }

    /// Collapse to a double, mapping the tag to IEEE infinity (for output only).
    double as_double() const {
        if (infinite_) return sign_ * std::numeric_limits<double>::infinity();
        return value_;
    }

    friend ExtReal operator+(ExtReal a, ExtReal b) {
        if (a.infinite_ && b.infinite_ && a.sign_ != b.sign_)
            throw std::invalid_argument("ExtReal: inf - inf");
        if (a.infinite_) return a;
        if (b.infinite_) return b;
        return ExtReal(a.value_ + b.value_);
    }
    friend ExtReal operator-(ExtReal a, ExtReal b) {
        ExtReal nb = b;
        if (nb.infinite_) nb.sign_ = -nb.sign_; else nb.value_ = -nb.value_;
        return a + nb;
    }
    friend bool operator<(ExtReal a, ExtReal b) {
        if (a.infinite_ || b.infinite_) {
            int sa = a.infinite_ ? a.sign_ : 0;
            int sb = b.infinite_ ? b.sign_ : 0;
            if (sa != sb) return sa < sb;
            if (sa != 0) return false; // same infinity
        }
        return a.as_double() < b.as_double();
    }
    friend bool operator<=(ExtReal a, ExtReal b) { return !(b < a); }

private:
    double value_ = 0.0;
    bool infinite_ = false;
    int sign_ = 0;
};

} // namespace flift
