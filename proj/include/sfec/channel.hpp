#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <vector>

#include "sfec/errors.hpp"
#include "sfec/format.hpp"
#include "sfec/seeding.hpp"
#include "sfec/tap_vector.hpp"

namespace sfec {

/// Ground-truth sparse FIR channel.
struct SparseChannel {
    TapVector taps;
    std::vector<std::size_t> support;  // ascending

    std::size_t length() const noexcept { return taps.size(); }
    std::size_t sparsity() const noexcept { return support.size(); }
};

/// K support positions uniformly without replacement, Gaussian gains of
/// variance 1/K so that E||h||^2 = 1. With `normalize`, each realization is
/// additionally rescaled to ||h|| = 1.
inline SparseChannel gen_sparse_channel(std::size_t n, std::size_t k, Engine& rng, bool normalize = false) {
    if (k < 1) throw ValidationError("sparsity k must be >= 1");
    if (k > n) throw ValidationError("sparsity k must not exceed channel length n");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    std::normal_distribution<double> gain(0.0, std::sqrt(1.0 / static_cast<double>(k)));
    SparseChannel ch{TapVector(n), std::move(idx)};
    for (std::size_t pos : ch.support) {
        double g = 0.0;
        while (g == 0.0) g = gain(rng);
        ch.taps[pos] = g;
    }
    if (normalize) {
        const double norm = std::sqrt(squared_norm(ch.taps));
        for (double& t : ch.taps) t /= norm;
    }
    return ch;
}

/// Six-tap sparse channel over 30 discrete delays, the sampled
/// Vehicular-B-like profile.
inline SparseChannel vehicular_b_preset(Engine& rng) { return gen_sparse_channel(30, 6, rng); }

inline void write_channel_csv(std::ostream& os, const SparseChannel& ch) {
    os << "index,value\n";
    for (std::size_t i = 0; i < ch.length(); ++i) os << i << ',' << format_real(ch.taps[i]) << '\n';
}

// ---------------------------------------------------------------------------
// Training signals
// ---------------------------------------------------------------------------

enum class SignalKind { PnBinary, GaussianWhite };

struct SignalSpec {
    SignalKind kind = SignalKind::PnBinary;
    std::size_t length = 1;
    double power = 1.0;  // sigma_x^2
};

struct NoiseSpec {
    double variance = 0.0;  // sigma_n^2
};

/// Maximal-length Fibonacci LFSR, x^15 + x^14 + 1 (period 2^15 - 1).
class Lfsr15 {
public:
    static constexpr unsigned order = 15;
    static constexpr std::uint32_t period = (1u << order) - 1;
    static constexpr std::uint32_t mask = period;

    explicit Lfsr15(std::uint32_t state) : state_(state & mask) {
        if (state_ == 0) state_ = 1;
    }

    std::uint32_t state() const noexcept { return state_; }

    /// Emits the current output bit and advances the register.
    unsigned next() noexcept {
        const unsigned out = state_ & 1u;
        const unsigned fb = ((state_ >> 0) ^ (state_ >> 1)) & 1u;
        state_ = (state_ >> 1) | (static_cast<std::uint32_t>(fb) << (order - 1));
        return out;
    }

private:
    std::uint32_t state_;
};

inline std::vector<double> gen_training_signal(const SignalSpec& spec, Engine& rng) {
    if (spec.length < 1) throw ValidationError("signal length must be >= 1");
    if (!(spec.power > 0.0)) throw ValidationError("signal power must be > 0");
    const double amp = std::sqrt(spec.power);
    std::vector<double> out(spec.length);
    if (spec.kind == SignalKind::PnBinary) {
        Lfsr15 reg(static_cast<std::uint32_t>(rng()));
        for (double& s : out) s = reg.next() ? amp : -amp;
    } else {
        std::normal_distribution<double> gauss(0.0, amp);
        for (double& s : out) s = gauss(rng);
    }
    return out;
}

/// [x(t), x(t-1), ..., x(t-n+1)], zero before time 0.
inline TapVector regressor(std::span<const double> signal, std::size_t t, std::size_t n) {
    TapVector x(n);
    for (std::size_t j = 0; j < n && j <= t; ++j)
        if (t - j < signal.size()) x[j] = signal[t - j];
    return x;
}

/// y = h^T x + z with one fresh N(0, variance) draw. The draw is consumed
/// even at zero variance so noise streams line up across SNRs.
inline double observe(const TapVector& h, const TapVector& x, const NoiseSpec& noise, Engine& rng) {
    const double clean = dot(h, x);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double z = unit(rng);
    if (noise.variance == 0.0) return clean;
    return clean + std::sqrt(noise.variance) * z;
}

inline double observe(const SparseChannel& h, const TapVector& x, const NoiseSpec& noise, Engine& rng) {
    return observe(h.taps, x, noise, rng);
}

/// sigma_n^2 = E_s * 10^(-snr/10)
inline double snr_to_noise_var(double snr_db, double es = 1.0) {
    if (!(es > 0.0)) throw ValidationError("transmit power must be > 0");
    return es * std::pow(10.0, -snr_db / 10.0);
}

}  // namespace sfec
