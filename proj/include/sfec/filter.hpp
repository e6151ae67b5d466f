#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sfec/errors.hpp"
#include "sfec/tap_vector.hpp"

namespace sfec {

// ---------------------------------------------------------------------------
// Hyperparameters
//
// Shrink strengths (gamma) are always derived from the stored (mu, rho, eps)
// on demand, never stored, so a sweep over rho needs nothing else updated.
// ---------------------------------------------------------------------------

/// Fixed-step LMS.
struct Lms {
    double mu_s;
};

/// Fixed-step least-mean-fourth baseline.
struct Lmf {
    double mu;
};

/// Mixed square/fourth error LMS/F with threshold lambda.
struct Lmsf {
    double mu;
    double lambda;
};

/// LMS/F with an l1 zero attractor.
struct ZaLmsf {
    double mu;
    double lambda;
    double rho_za;
    double gamma() const noexcept { return mu * rho_za; }
};

/// LMS/F with a reweighted (log-sum) zero attractor.
struct RzaLmsf {
    double mu;
    double lambda;
    double rho_rza;
    double epsilon;
    double gamma() const noexcept { return epsilon * mu * rho_rza; }
};

/// LMS with an l1 zero attractor.
struct ZaLms {
    double mu_s;
    double rho_zas;
    double gamma() const noexcept { return mu_s * rho_zas; }
};

/// LMS with a reweighted zero attractor.
struct RzaLms {
    double mu_s;
    double rho_rzas;
    double epsilon;
    double gamma() const noexcept { return epsilon * mu_s * rho_rzas; }
};

using AlgoParams = std::variant<Lms, Lmf, Lmsf, ZaLmsf, RzaLmsf, ZaLms, RzaLms>;

namespace detail {

inline void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string(name) + " must be finite and > 0");
}

inline void require_non_negative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError(std::string(name) + " must be finite and >= 0");
}

}  // namespace detail

inline void validate(const Lms& p) { detail::require_positive(p.mu_s, "mu_s"); }
inline void validate(const Lmf& p) { detail::require_positive(p.mu, "mu"); }
inline void validate(const Lmsf& p) {
    detail::require_positive(p.mu, "mu");
    detail::require_positive(p.lambda, "lambda");
}
inline void validate(const ZaLmsf& p) {
    validate(Lmsf{p.mu, p.lambda});
    detail::require_non_negative(p.rho_za, "rho_za");
}
inline void validate(const RzaLmsf& p) {
    validate(Lmsf{p.mu, p.lambda});
    detail::require_non_negative(p.rho_rza, "rho_rza");
    detail::require_positive(p.epsilon, "epsilon");
}
inline void validate(const ZaLms& p) {
    detail::require_positive(p.mu_s, "mu_s");
    detail::require_non_negative(p.rho_zas, "rho_zas");
}
inline void validate(const RzaLms& p) {
    detail::require_positive(p.mu_s, "mu_s");
    detail::require_non_negative(p.rho_rzas, "rho_rzas");
    detail::require_positive(p.epsilon, "epsilon");
}
inline void validate(const AlgoParams& p) {
    std::visit([](const auto& q) { validate(q); }, p);
}

/// Display name, e.g. "ZA-LMS/F".
inline std::string label(const AlgoParams& p) {
    constexpr const char* names[] = {"LMS", "LMF", "LMS/F", "ZA-LMS/F", "RZA-LMS/F", "ZA-LMS", "RZA-LMS"};
    return names[p.index()];
}

/// File-name safe identifier, e.g. "za-lmsf".
inline std::string slug(const AlgoParams& p) {
    constexpr const char* names[] = {"lms", "lmf", "lmsf", "za-lmsf", "rza-lmsf", "za-lms", "rza-lms"};
    return names[p.index()];
}

/// Named hyperparameters in declaration order.
inline std::vector<std::pair<std::string, double>> fields(const AlgoParams& p) {
    struct Visitor {
        using Out = std::vector<std::pair<std::string, double>>;
        Out operator()(const Lms& q) const { return {{"mu_s", q.mu_s}}; }
        Out operator()(const Lmf& q) const { return {{"mu", q.mu}}; }
        Out operator()(const Lmsf& q) const { return {{"mu", q.mu}, {"lambda", q.lambda}}; }
        Out operator()(const ZaLmsf& q) const { return {{"mu", q.mu}, {"lambda", q.lambda}, {"rho_za", q.rho_za}}; }
        Out operator()(const RzaLmsf& q) const {
            return {{"mu", q.mu}, {"lambda", q.lambda}, {"rho_rza", q.rho_rza}, {"epsilon", q.epsilon}};
        }
        Out operator()(const ZaLms& q) const { return {{"mu_s", q.mu_s}, {"rho_zas", q.rho_zas}}; }
        Out operator()(const RzaLms& q) const {
            return {{"mu_s", q.mu_s}, {"rho_rzas", q.rho_rzas}, {"epsilon", q.epsilon}};
        }
    };
    return std::visit(Visitor{}, p);
}

// ---------------------------------------------------------------------------
// State
// ---------------------------------------------------------------------------

struct FilterState {
    TapVector weights;
    std::size_t iteration = 0;

    FilterState() = default;
    explicit FilterState(std::size_t n) : weights(n) {
        if (n == 0) throw ValidationError("filter length must be >= 1");
    }
    explicit FilterState(TapVector w) : weights(std::move(w)) {
        if (weights.empty()) throw ValidationError("filter length must be >= 1");
    }

    std::size_t size() const noexcept { return weights.size(); }
};

/// Diagnostics of one update.
struct StepRecord {
    double error = 0.0;
    /// LMS-equivalent step mu(n): the update equals effective_step * e * x
    /// plus the shrink term.
    double effective_step = 0.0;
    /// Per-tap displacement subtracted by the sparse penalty (zeros when none).
    TapVector shrink_applied;
};

/// e = y - w^T x
inline double prediction_error(const FilterState& state, const TapVector& x, double y) {
    return y - dot(state.weights, x);
}

/// e^2 / (e^2 + lambda), the ratio mu(n)/mu of LMS/F. In [0, 1).
inline double variable_step_ratio(double error, double lambda) {
    const double e2 = error * error;
    return e2 / (e2 + lambda);
}

namespace detail {

enum class Attractor { None, ZeroAttract, Reweighted };

struct UpdateRule {
    double gradient_scale;  // g in w += g * x
    double effective_step;
    Attractor attractor = Attractor::None;
    double gamma = 0.0;
    double epsilon = 0.0;
};

inline double lmsf_scale(double mu, double lambda, double e) {
    const double e2 = e * e;
    return mu * e2 * e / (e2 + lambda);
}

inline UpdateRule rule_for(const Lms& p, double e) { return {p.mu_s * e, p.mu_s}; }
inline UpdateRule rule_for(const Lmf& p, double e) { return {p.mu * e * e * e, p.mu * e * e}; }
inline UpdateRule rule_for(const Lmsf& p, double e) {
    return {lmsf_scale(p.mu, p.lambda, e), p.mu * variable_step_ratio(e, p.lambda)};
}
inline UpdateRule rule_for(const ZaLmsf& p, double e) {
    auto r = rule_for(Lmsf{p.mu, p.lambda}, e);
    r.attractor = Attractor::ZeroAttract;
    r.gamma = p.gamma();
    return r;
}
inline UpdateRule rule_for(const RzaLmsf& p, double e) {
    auto r = rule_for(Lmsf{p.mu, p.lambda}, e);
    r.attractor = Attractor::Reweighted;
    r.gamma = p.gamma();
    r.epsilon = p.epsilon;
    return r;
}
inline UpdateRule rule_for(const ZaLms& p, double e) {
    return {p.mu_s * e, p.mu_s, Attractor::ZeroAttract, p.gamma()};
}
inline UpdateRule rule_for(const RzaLms& p, double e) {
    return {p.mu_s * e, p.mu_s, Attractor::Reweighted, p.gamma(), p.epsilon};
}

inline double shrink_of(const UpdateRule& r, double w) {
    switch (r.attractor) {
        case Attractor::ZeroAttract: return r.gamma * sign(w);
        case Attractor::Reweighted: return r.gamma * sign(w) / (1.0 + r.epsilon * std::abs(w));
        case Attractor::None: break;
    }
    return 0.0;
}

// Applies one update in place. The attractor is evaluated on the pre-update
// weights. A zero gamma skips the penalty entirely so the reduction to the
// base algorithm is bit-exact.
template <class P>
double apply(FilterState& state, const TapVector& x, double y, const P& params, StepRecord* record) {
    require_same_size(state.size(), x.size());
    const double e = prediction_error(state, x, y);
    const UpdateRule rule = rule_for(params, e);
    const bool shrink = rule.attractor != Attractor::None && rule.gamma != 0.0;

    if (record) {
        record->error = e;
        record->effective_step = rule.effective_step;
        record->shrink_applied = TapVector(state.size());
    }

    auto& w = state.weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
        double next = w[i] + rule.gradient_scale * x[i];
        if (shrink) {
            const double s = shrink_of(rule, w[i]);
            next -= s;
            if (record) record->shrink_applied[i] = s;
        }
        w[i] = next;
    }
    ++state.iteration;

    if (!w.all_finite())
        throw DivergenceError("filter weights became non-finite at iteration " +
                                  std::to_string(state.iteration),
                              state.iteration);
    return e;
}

}  // namespace detail

/// In-place update with any algorithm; returns the a-priori error e(n).
inline double step_in_place(FilterState& state, const TapVector& x, double y, const AlgoParams& params,
                            StepRecord* record = nullptr) {
    return std::visit(
        [&](const auto& p) {
            validate(p);
            return detail::apply(state, x, y, p, record);
        },
        params);
}

inline StepRecord step_with_record(FilterState& state, const TapVector& x, double y, const AlgoParams& params) {
    StepRecord rec;
    step_in_place(state, x, y, params, &rec);
    return rec;
}

/// Pure form: returns the successor state.
inline FilterState step(FilterState state, const TapVector& x, double y, const AlgoParams& params) {
    step_in_place(state, x, y, params);
    return state;
}

inline FilterState lms_step(FilterState s, const TapVector& x, double y, const Lms& p) { return step(std::move(s), x, y, p); }
inline FilterState lmf_step(FilterState s, const TapVector& x, double y, const Lmf& p) { return step(std::move(s), x, y, p); }
inline FilterState lmsf_step(FilterState s, const TapVector& x, double y, const Lmsf& p) { return step(std::move(s), x, y, p); }
inline FilterState za_lmsf_step(FilterState s, const TapVector& x, double y, const ZaLmsf& p) { return step(std::move(s), x, y, p); }
inline FilterState rza_lmsf_step(FilterState s, const TapVector& x, double y, const RzaLmsf& p) { return step(std::move(s), x, y, p); }
inline FilterState za_lms_step(FilterState s, const TapVector& x, double y, const ZaLms& p) { return step(std::move(s), x, y, p); }
inline FilterState rza_lms_step(FilterState s, const TapVector& x, double y, const RzaLms& p) { return step(std::move(s), x, y, p); }

}  // namespace sfec
