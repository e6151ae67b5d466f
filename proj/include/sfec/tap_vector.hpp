#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "sfec/errors.hpp"

namespace sfec {

/// Fixed-length real coefficient vector: a channel impulse response, an
/// estimate of one, or a regressor window.
///
/// The length is set at construction and never changes; element values are
/// mutable so update rules can work in place.
class TapVector {
public:
    TapVector() = default;
    explicit TapVector(std::size_t n, double fill = 0.0) : v_(n, fill) {}
    TapVector(std::initializer_list<double> init) : v_(init) {}
    explicit TapVector(std::vector<double> v) : v_(std::move(v)) {}

    std::size_t size() const noexcept { return v_.size(); }
    bool empty() const noexcept { return v_.empty(); }

    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }

    std::span<double> span() noexcept { return v_; }
    std::span<const double> span() const noexcept { return v_; }
    const std::vector<double>& values() const noexcept { return v_; }

    auto begin() noexcept { return v_.begin(); }
    auto end() noexcept { return v_.end(); }
    auto begin() const noexcept { return v_.begin(); }
    auto end() const noexcept { return v_.end(); }

    bool all_finite() const noexcept {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    friend bool operator==(const TapVector&, const TapVector&) = default;

private:
    std::vector<double> v_;
};

inline void require_same_size(std::size_t expected, std::size_t got) {
    if (expected != got) throw DimensionMismatch(expected, got);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    require_same_size(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double dot(const TapVector& a, const TapVector& b) { return dot(a.span(), b.span()); }

inline double squared_norm(const TapVector& a) { return dot(a, a); }

/// ||a - b||^2
inline double squared_distance(const TapVector& a, const TapVector& b) {
    require_same_size(a.size(), b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

/// Three-valued sign: sgn(0) == 0.
inline double sign(double x) noexcept { return (x > 0.0) - (x < 0.0); }

/// Component-wise sign, values in {-1, 0, +1}.
inline TapVector sign_vec(const TapVector& h) {
    TapVector out(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) out[i] = sign(h[i]);
    return out;
}

}  // namespace sfec
