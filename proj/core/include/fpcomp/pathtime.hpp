#pragma once

#include <cmath>
#include <compare>
#include <limits>

namespace fpc {

/// Compensated two-double accumulator for passage-time sums.
///
/// A PathTime stores a path sum as an unevaluated pair hi + lo with
/// |lo| <= ulp(hi)/2, so the represented value is exact up to ~2^-106
/// relative error regardless of path length. All growth engines and all
/// test oracles accumulate with this type, which makes order-independent
/// identities (coupling inclusions, quantile scaling) hold at full
/// precision instead of drifting by one ulp per edge.
struct PathTime {
    double hi = 0.0;
    double lo = 0.0;

    static PathTime zero() { return {}; }

    static PathTime infinite() {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }

    bool is_infinite() const { return std::isinf(hi); }

    /// Nearest double to the represented value (hi, by normalization).
    double value() const { return hi; }

    friend bool operator==(const PathTime& a, const PathTime& b) {
        return a.hi == b.hi && a.lo == b.lo;
    }
    friend std::strong_ordering operator<=>(const PathTime& a, const PathTime& b) {
        if (a.hi < b.hi) return std::strong_ordering::less;
        if (a.hi > b.hi) return std::strong_ordering::greater;
        if (a.lo < b.lo) return std::strong_ordering::less;
        if (a.lo > b.lo) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }
};

namespace detail {

// Knuth two_sum: s + err == a + b exactly.
inline void two_sum(double a, double b, double& s, double& err) {
    s = a + b;
    const double bb = s - a;
    err = (a - (s - bb)) + (b - bb);
}

// Requires |a| >= |b| or a == 0.
inline void fast_two_sum(double a, double b, double& s, double& err) {
    s = a + b;
    err = b - (s - a);
}

}  // namespace detail

/// t + w with w >= 0 a plain double (an edge passage time).
inline PathTime path_add(const PathTime& t, double w) {
    if (t.is_infinite()) return t;
    double s, e;
    detail::two_sum(t.hi, w, s, e);
    e += t.lo;
    PathTime r;
    detail::fast_two_sum(s, e, r.hi, r.lo);
    return r;
}

inline PathTime path_add(const PathTime& a, const PathTime& b) {
    if (a.is_infinite() || b.is_infinite()) return PathTime::infinite();
    double s, e;
    detail::two_sum(a.hi, b.hi, s, e);
    e += a.lo + b.lo;
    PathTime r;
    detail::fast_two_sum(s, e, r.hi, r.lo);
    return r;
}

/// Componentwise scaling; exact when 1/k is a power of two.
inline PathTime path_scale(const PathTime& t, double factor) {
    if (t.is_infinite()) return t;
    double s, e;
    detail::two_sum(t.hi * factor, t.lo * factor, s, e);
    PathTime r;
    detail::fast_two_sum(s, e, r.hi, r.lo);
    return r;
}

inline PathTime path_from(double v) { return {v, 0.0}; }

}  // namespace fpc
