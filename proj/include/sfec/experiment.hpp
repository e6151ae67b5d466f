#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sfec/channel.hpp"
#include "sfec/errors.hpp"
#include "sfec/filter.hpp"
#include "sfec/seeding.hpp"
#include "sfec/tap_vector.hpp"

namespace sfec {

/// Scalar hyperparameters of the standard comparison setup; the algorithm list
/// of an experiment is built from these unless given explicitly.
struct ParamSet {
    double mu = 0.04;
    double lambda = 0.8;
    double mu_s = 0.008;
    double mu_lmf = 0.005;
    double rho_za = 0.0004;
    double rho_rza = 0.06;
    double rho_zas = 0.008;
    double rho_rzas = 0.8;
    double epsilon = 20.0;
};

/// Regularization parameters tuned per sparsity level (K=2 and K=4 rows).
inline ParamSet tuned_params(std::size_t k) {
    ParamSet p;
    if (k == 4) {
        p.rho_za = 0.0002;
        p.rho_rza = 0.04;
        p.rho_zas = 0.004;
        p.rho_rzas = 0.4;
    }
    return p;
}

/// LMS, ZA-LMS, RZA-LMS, LMS/F, ZA-LMS/F, RZA-LMS/F, LMF.
inline std::vector<AlgoParams> comparison_set(const ParamSet& p) {
    return {
        Lms{p.mu_s},
        ZaLms{p.mu_s, p.rho_zas},
        RzaLms{p.mu_s, p.rho_rzas, p.epsilon},
        Lmsf{p.mu, p.lambda},
        ZaLmsf{p.mu, p.lambda, p.rho_za},
        RzaLmsf{p.mu, p.lambda, p.rho_rza, p.epsilon},
        Lmf{p.mu_lmf},
    };
}

struct ExperimentConfig {
    std::size_t n_len = 16;
    std::size_t k_sparsity = 2;
    double snr_db = 10.0;
    SignalKind signal = SignalKind::PnBinary;
    double signal_power = 1.0;
    ParamSet params = tuned_params(2);
    std::vector<AlgoParams> algos;  // empty: comparison_set(params)
    std::size_t num_runs = 200;
    std::size_t num_iterations = 1000;
    std::uint64_t master_seed = 1;
    bool normalize_channel = false;
    double tail_fraction = 0.1;

    double noise_variance() const { return snr_to_noise_var(snr_db); }
    std::vector<AlgoParams> algorithms() const { return algos.empty() ? comparison_set(params) : algos; }
};

inline void validate(const ExperimentConfig& c) {
    if (c.n_len < 1) throw ValidationError("n must be >= 1");
    if (c.k_sparsity < 1) throw ValidationError("k must be >= 1");
    if (c.k_sparsity > c.n_len)
        throw ValidationError("k (" + std::to_string(c.k_sparsity) + ") must not exceed n (" +
                              std::to_string(c.n_len) + ")");
    if (c.num_runs < 1) throw ValidationError("runs must be >= 1");
    if (c.num_iterations < c.n_len) throw ValidationError("iters must be >= n");
    if (!std::isfinite(c.snr_db)) throw ValidationError("snr_db must be finite");
    if (!(c.signal_power > 0.0)) throw ValidationError("signal_power must be > 0");
    if (!(c.tail_fraction > 0.0 && c.tail_fraction <= 0.5))
        throw ValidationError("tail_fraction must lie in (0, 0.5]");
    for (const auto& a : c.algorithms()) validate(a);
}

/// Per-iteration Monte-Carlo average of ||h - w(n)||^2 (linear units).
struct MseCurve {
    std::vector<double> values;
    std::string algo_label;
    std::string config_digest;
};

struct SweepResult {
    std::vector<double> grid;
    std::vector<double> steady_mse;
    std::size_t argmin_index = 0;

    double argmin() const { return grid.at(argmin_index); }
};

/// Raised when any trial of an experiment diverges; carries the first
/// (lowest-index) failing trial.
class ExperimentAborted : public DivergenceError {
public:
    ExperimentAborted(std::size_t trial, std::string algo, std::size_t iteration)
        : DivergenceError("trial " + std::to_string(trial) + " (" + algo + ") diverged at iteration " +
                              std::to_string(iteration),
                          iteration),
          trial_(trial), algo_(std::move(algo)) {}

    std::size_t trial() const noexcept { return trial_; }
    const std::string& algo() const noexcept { return algo_; }

private:
    std::size_t trial_;
    std::string algo_;
};

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

/// One realization of channel, training signal and observations. The
/// observations do not depend on the filter, so every algorithm of a trial
/// consumes the same (h, x, z).
struct TrialData {
    SparseChannel channel;
    std::vector<double> signal;
    std::vector<double> observations;
};

inline TrialData make_trial_data(const ExperimentConfig& c, std::uint64_t seed) {
    auto ch_rng = make_engine(seed, Stream::Channel);
    auto sig_rng = make_engine(seed, Stream::Signal);
    auto noise_rng = make_engine(seed, Stream::Noise);

    TrialData d;
    d.channel = gen_sparse_channel(c.n_len, c.k_sparsity, ch_rng, c.normalize_channel);
    d.signal = gen_training_signal({c.signal, c.num_iterations, c.signal_power}, sig_rng);
    d.observations.resize(c.num_iterations);
    const NoiseSpec noise{c.noise_variance()};
    for (std::size_t t = 0; t < c.num_iterations; ++t)
        d.observations[t] = observe(d.channel, regressor(d.signal, t, c.n_len), noise, noise_rng);
    return d;
}

struct TrialOutcome {
    std::vector<double> trajectory;  // ||h - w(n)||^2 before update n
    std::optional<std::size_t> failed_at;
};

inline TrialOutcome run_filter(const TrialData& d, const AlgoParams& algo) {
    const std::size_t n = d.channel.length();
    const std::size_t iters = d.observations.size();
    TrialOutcome out;
    out.trajectory.resize(iters);
    FilterState state(n);
    TapVector x(n);
    for (std::size_t t = 0; t < iters; ++t) {
        out.trajectory[t] = squared_distance(d.channel.taps, state.weights);
        for (std::size_t j = n - 1; j > 0; --j) x[j] = x[j - 1];
        x[0] = d.signal[t];
        try {
            step_in_place(state, x, d.observations[t], algo);
        } catch (const DivergenceError&) {
            out.failed_at = t;
            std::fill(out.trajectory.begin() + static_cast<std::ptrdiff_t>(t), out.trajectory.end(),
                      std::numeric_limits<double>::quiet_NaN());
            break;
        }
    }
    return out;
}

/// A single trial of one algorithm from w(0) = 0.
inline TrialOutcome run_trial(const ExperimentConfig& c, const AlgoParams& algo, std::uint64_t seed) {
    validate(algo);
    return run_filter(make_trial_data(c, seed), algo);
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

inline std::string config_digest(const ExperimentConfig& c) {
    std::uint64_t h = mix64(0x5fec);
    auto add = [&h](std::uint64_t v) { h = combine_seed(h, v); };
    auto addf = [&add](double v) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof v);
        std::memcpy(&bits, &v, sizeof bits);
        add(bits);
    };
    add(c.n_len);
    add(c.k_sparsity);
    addf(c.snr_db);
    add(static_cast<std::uint64_t>(c.signal));
    addf(c.signal_power);
    add(c.num_runs);
    add(c.num_iterations);
    add(c.master_seed);
    add(c.normalize_channel);
    for (const auto& a : c.algorithms()) {
        add(a.index());
        for (const auto& [name, value] : fields(a)) addf(value);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Runs every algorithm over the same per-trial realizations and averages.
///
/// Trials are processed in fixed-size blocks; workers fill the block's
/// trajectories in any order, then the block is summed in trial order. The
/// result is therefore bit-identical for any thread count.
inline std::vector<MseCurve> run_algorithms(const ExperimentConfig& c, const std::vector<AlgoParams>& algos,
                                            std::size_t threads = 1) {
    validate(c);
    if (algos.empty()) throw ValidationError("at least one algorithm is required");
    for (const auto& a : algos) validate(a);

    const std::size_t na = algos.size();
    const std::size_t iters = c.num_iterations;
    const std::size_t block = 64;
    const std::size_t workers = std::max<std::size_t>(1, threads);

    std::vector<std::vector<double>> sums(na, std::vector<double>(iters, 0.0));
    std::vector<TrialOutcome> buf(block * na);

    for (std::size_t first = 0; first < c.num_runs; first += block) {
        const std::size_t count = std::min(block, c.num_runs - first);
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (std::size_t i = next++; i < count; i = next++) {
                const TrialData d = make_trial_data(c, trial_seed(c.master_seed, first + i));
                for (std::size_t a = 0; a < na; ++a) buf[i * na + a] = run_filter(d, algos[a]);
            }
        };
        if (workers == 1 || count == 1) {
            work();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(work);
        }

        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t a = 0; a < na; ++a) {
                const auto& out = buf[i * na + a];
                if (out.failed_at) throw ExperimentAborted(first + i, label(algos[a]), *out.failed_at);
                for (std::size_t t = 0; t < iters; ++t) sums[a][t] += out.trajectory[t];
            }
    }

    const std::string digest = config_digest(c);
    std::vector<MseCurve> curves;
    curves.reserve(na);
    const double runs = static_cast<double>(c.num_runs);
    for (std::size_t a = 0; a < na; ++a) {
        MseCurve curve{std::move(sums[a]), label(algos[a]), digest};
        for (double& v : curve.values) v /= runs;
        curves.push_back(std::move(curve));
    }
    return curves;
}

inline MseCurve run_monte_carlo(const ExperimentConfig& c, const AlgoParams& algo, std::size_t threads = 1) {
    return std::move(run_algorithms(c, {algo}, threads).front());
}

/// One curve per configured algorithm over common random numbers.
inline std::vector<MseCurve> compare_algorithms(const ExperimentConfig& c, std::size_t threads = 1) {
    return run_algorithms(c, c.algorithms(), threads);
}

/// Mean of the final ceil(tail_fraction * len) values.
inline double steady_state_estimate(std::span<const double> values, double tail_fraction = 0.1) {
    if (values.empty()) throw ValidationError("steady_state_estimate: empty curve");
    if (!(tail_fraction > 0.0 && tail_fraction <= 0.5))
        throw ValidationError("steady_state_estimate: tail_fraction must lie in (0, 0.5]");
    const double exact = tail_fraction * static_cast<double>(values.size());
    auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    count = std::clamp<std::size_t>(count, 1, values.size());
    double acc = 0.0;
    for (std::size_t i = values.size() - count; i < values.size(); ++i) acc += values[i];
    return acc / static_cast<double>(count);
}

inline double steady_state_estimate(const MseCurve& curve, double tail_fraction = 0.1) {
    return steady_state_estimate(curve.values, tail_fraction);
}

enum class SparseFamily { ZaLmsf, RzaLmsf };

namespace detail {
inline SweepResult sweep(const ExperimentConfig& c, std::vector<double> grid, std::vector<AlgoParams> algos,
                         std::size_t threads) {
    if (grid.empty()) throw ValidationError("sweep grid must not be empty");
    const auto curves = run_algorithms(c, algos, threads);
    SweepResult r;
    r.grid = std::move(grid);
    for (const auto& curve : curves) r.steady_mse.push_back(steady_state_estimate(curve, c.tail_fraction));
    r.argmin_index = static_cast<std::size_t>(
        std::distance(r.steady_mse.begin(), std::min_element(r.steady_mse.begin(), r.steady_mse.end())));
    return r;
}
}  // namespace detail

/// Steady-state MSE over a grid of regularization values. All grid points
/// share the trial realizations.
inline SweepResult sweep_regularization(const ExperimentConfig& c, SparseFamily family,
                                        const std::vector<double>& rho_grid, std::size_t threads = 1) {
    const auto& p = c.params;
    std::vector<AlgoParams> algos;
    for (double rho : rho_grid) {
        if (!(rho >= 0.0)) throw ValidationError("regularization grid values must be >= 0");
        if (family == SparseFamily::ZaLmsf)
            algos.push_back(ZaLmsf{p.mu, p.lambda, rho});
        else
            algos.push_back(RzaLmsf{p.mu, p.lambda, rho, p.epsilon});
    }
    return detail::sweep(c, rho_grid, std::move(algos), threads);
}

/// RZA-LMS/F steady-state MSE over reweight factors at the configured rho_rza.
inline SweepResult sweep_reweight(const ExperimentConfig& c, const std::vector<double>& epsilon_grid,
                                  std::size_t threads = 1) {
    const auto& p = c.params;
    std::vector<AlgoParams> algos;
    for (double eps : epsilon_grid) {
        if (!(eps > 0.0)) throw ValidationError("epsilon grid values must be > 0");
        algos.push_back(RzaLmsf{p.mu, p.lambda, p.rho_rza, eps});
    }
    return detail::sweep(c, epsilon_grid, std::move(algos), threads);
}

}  // namespace sfec
