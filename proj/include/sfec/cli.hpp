#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sfec/channel.hpp"
#include "sfec/errors.hpp"
#include "sfec/experiment.hpp"
#include "sfec/filter.hpp"
#include "sfec/format.hpp"
#include "sfec/theory.hpp"

namespace sfec::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* tool_version = "1.0.0";
inline constexpr const char* env_prefix = "SFEC_";

/// Output files could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class KeyType { Unsigned, Real, Bool, Signal, AlgoList };

struct KeySpec {
    const char* name;
    KeyType type;
};

/// Every recognized key. Flags spell these with dashes (--snr-db), the
/// environment upper-cased with the prefix (SFEC_SNR_DB).
inline const std::vector<KeySpec>& config_keys() {
    static const std::vector<KeySpec> keys = {
        {"n", KeyType::Unsigned},          {"k", KeyType::Unsigned},        {"snr_db", KeyType::Real},
        {"mu", KeyType::Real},             {"mu_s", KeyType::Real},         {"mu_lmf", KeyType::Real},
        {"lambda", KeyType::Real},         {"rho_za", KeyType::Real},       {"rho_rza", KeyType::Real},
        {"rho_zas", KeyType::Real},        {"rho_rzas", KeyType::Real},     {"epsilon", KeyType::Real},
        {"runs", KeyType::Unsigned},       {"iters", KeyType::Unsigned},    {"seed", KeyType::Unsigned},
        {"signal", KeyType::Signal},       {"signal_power", KeyType::Real}, {"normalize_channel", KeyType::Bool},
        {"tail_fraction", KeyType::Real},  {"algos", KeyType::AlgoList},
    };
    return keys;
}

inline std::string flag_name(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
}

inline std::string env_name(std::string key) {
    for (char& c : key) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return env_prefix + key;
}

inline const KeySpec& key_spec(const std::string& key) {
    for (const auto& k : config_keys())
        if (key == k.name) return k;
    throw ValidationError("unknown configuration key '" + key + "'");
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur.erase(0, cur.find_first_not_of(" \t"));
        cur.erase(cur.find_last_not_of(" \t") + 1);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

inline double parse_real(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end) throw ValidationError(key + ": '" + text + "' is not a number");
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end) throw ValidationError(key + ": '" + text + "' is not a non-negative integer");
    return v;
}

/// Converts a textual (flag/env) value into its JSON form.
inline json text_to_json(const std::string& key, const std::string& text) {
    switch (key_spec(key).type) {
        case KeyType::Unsigned: return parse_unsigned(key, text);
        case KeyType::Real: return parse_real(key, text);
        case KeyType::Bool:
            if (text == "1" || text == "true" || text == "yes" || text == "on") return true;
            if (text == "0" || text == "false" || text == "no" || text == "off") return false;
            throw ValidationError(key + ": '" + text + "' is not a boolean");
        case KeyType::Signal: return text;
        case KeyType::AlgoList: return split(text, ',');
    }
    return nullptr;
}

inline void check_type(const std::string& key, const json& v) {
    bool ok = false;
    switch (key_spec(key).type) {
        case KeyType::Unsigned: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); break;
        case KeyType::Real: ok = v.is_number(); break;
        case KeyType::Bool: ok = v.is_boolean(); break;
        case KeyType::Signal: ok = v.is_string(); break;
        case KeyType::AlgoList: ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); }); break;
    }
    if (!ok) throw ValidationError(key + ": value " + v.dump() + " has the wrong type");
}

}  // namespace detail

inline SignalKind parse_signal(const std::string& s) {
    if (s == "pn") return SignalKind::PnBinary;
    if (s == "gaussian") return SignalKind::GaussianWhite;
    throw ValidationError("signal must be 'pn' or 'gaussian', got '" + s + "'");
}

inline std::string signal_name(SignalKind k) { return k == SignalKind::PnBinary ? "pn" : "gaussian"; }

inline AlgoParams algo_from_slug(const std::string& s, const ParamSet& p) {
    for (const auto& a : comparison_set(p))
        if (slug(a) == s) return a;
    throw ValidationError("unknown algorithm '" + s + "'");
}

/// Where configuration values come from. Precedence: flags, then
/// environment, then file, then built-in defaults.
struct ConfigSources {
    std::optional<fs::path> file;
    std::map<std::string, std::string> flags;  // key -> text
    std::function<std::optional<std::string>(const std::string&)> env;
};

struct ResolvedConfig {
    ExperimentConfig config;
    std::vector<std::string> warnings;
};

/// The `config` block of a config file or run manifest.
inline json read_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config file " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config file must hold a JSON object");
    if (doc.contains("tool_version") && doc.contains("config")) return doc.at("config");
    return doc;
}

/// Builds a validated config from a flat key/value JSON object.
inline ResolvedConfig config_from_json(const json& merged) {
    for (const auto& [key, value] : merged.items()) detail::check_type(key, value);

    auto get_u = [&](const char* k, std::uint64_t def) {
        return merged.contains(k) ? merged.at(k).get<std::uint64_t>() : def;
    };
    auto get_d = [&](const char* k, double def) { return merged.contains(k) ? merged.at(k).get<double>() : def; };

    ResolvedConfig out;
    auto& c = out.config;
    c.n_len = get_u("n", 16);
    c.k_sparsity = get_u("k", 2);
    c.snr_db = get_d("snr_db", 10.0);
    c.signal = merged.contains("signal") ? parse_signal(merged.at("signal").get<std::string>()) : SignalKind::PnBinary;
    c.signal_power = get_d("signal_power", 1.0);
    c.num_runs = get_u("runs", 200);
    c.num_iterations = get_u("iters", 1000);
    c.master_seed = get_u("seed", 1);
    c.normalize_channel = merged.value("normalize_channel", false);
    c.tail_fraction = get_d("tail_fraction", 0.1);

    ParamSet p = tuned_params(c.k_sparsity);
    p.mu = get_d("mu", p.mu);
    p.lambda = get_d("lambda", p.lambda);
    p.mu_s = get_d("mu_s", p.mu_s);
    p.mu_lmf = get_d("mu_lmf", p.mu_lmf);
    p.rho_za = get_d("rho_za", p.rho_za);
    p.rho_rza = get_d("rho_rza", p.rho_rza);
    p.rho_zas = get_d("rho_zas", p.rho_zas);
    p.rho_rzas = get_d("rho_rzas", p.rho_rzas);
    p.epsilon = get_d("epsilon", p.epsilon);
    c.params = p;

    if (merged.contains("algos"))
        for (const auto& s : merged.at("algos")) c.algos.push_back(algo_from_slug(s.get<std::string>(), p));

    validate(c);

    const double bound = theory::stability_bound(c.n_len, c.signal_power);
    if (!(p.mu < bound))
        out.warnings.push_back("mu = " + format_real(p.mu) + " is at or above the stability bound " +
                               format_real(bound) + "; LMS/F-type filters may diverge");
    if (!(p.mu_s < bound))
        out.warnings.push_back("mu_s = " + format_real(p.mu_s) + " is at or above the stability bound " +
                               format_real(bound) + "; LMS-type filters may diverge");
    return out;
}

inline ResolvedConfig parse_config(const ConfigSources& src) {
    json merged = json::object();
    if (src.file) {
        json file = read_config_file(*src.file);
        for (auto& [key, value] : file.items()) {
            key_spec(key);
            merged[key] = value;
        }
    }
    if (src.env)
        for (const auto& k : config_keys())
            if (auto v = src.env(env_name(k.name))) merged[k.name] = detail::text_to_json(k.name, *v);
    for (const auto& [key, text] : src.flags) merged[key] = detail::text_to_json(key, text);
    return config_from_json(merged);
}

/// Fully resolved echo; feeding it back through parse_config reproduces
/// the same config.
inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["n"] = c.n_len;
    j["k"] = c.k_sparsity;
    j["snr_db"] = c.snr_db;
    j["signal"] = signal_name(c.signal);
    j["signal_power"] = c.signal_power;
    j["mu"] = c.params.mu;
    j["lambda"] = c.params.lambda;
    j["mu_s"] = c.params.mu_s;
    j["mu_lmf"] = c.params.mu_lmf;
    j["rho_za"] = c.params.rho_za;
    j["rho_rza"] = c.params.rho_rza;
    j["rho_zas"] = c.params.rho_zas;
    j["rho_rzas"] = c.params.rho_rzas;
    j["epsilon"] = c.params.epsilon;
    j["runs"] = c.num_runs;
    j["iters"] = c.num_iterations;
    j["seed"] = c.master_seed;
    j["normalize_channel"] = c.normalize_channel;
    j["tail_fraction"] = c.tail_fraction;
    if (!c.algos.empty()) {
        json list = json::array();
        for (const auto& a : c.algos) list.push_back(slug(a));
        j["algos"] = list;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// "a,b,c", "log:lo:hi:count" (log-spaced) or "lin:lo:hi:count".
inline std::vector<double> parse_grid(const std::string& spec) {
    auto ranged = [&](bool log) {
        const auto parts = detail::split(spec.substr(4), ':');
        if (parts.size() != 3) throw ValidationError("grid '" + spec + "': expected lo:hi:count");
        const double lo = detail::parse_real("grid", parts[0]);
        const double hi = detail::parse_real("grid", parts[1]);
        const auto count = detail::parse_unsigned("grid", parts[2]);
        if (count < 1) throw ValidationError("grid count must be >= 1");
        if (log && !(lo > 0.0 && hi > 0.0)) throw ValidationError("log grid bounds must be > 0");
        std::vector<double> g(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            g[i] = log ? std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo))) : lo + f * (hi - lo);
        }
        g.front() = lo;
        if (count > 1) g.back() = hi;
        return g;
    };
    if (spec.rfind("log:", 0) == 0) return ranged(true);
    if (spec.rfind("lin:", 0) == 0) return ranged(false);
    std::vector<double> g;
    for (const auto& s : detail::split(spec, ',')) g.push_back(detail::parse_real("grid", s));
    if (g.empty()) throw ValidationError("grid must not be empty");
    return g;
}

enum class SweepTarget { RhoZa, RhoRza, Epsilon };

inline SweepTarget parse_sweep_target(const std::string& s) {
    if (s == "rho_za") return SweepTarget::RhoZa;
    if (s == "rho_rza") return SweepTarget::RhoRza;
    if (s == "epsilon") return SweepTarget::Epsilon;
    throw ValidationError("sweep target must be rho_za, rho_rza or epsilon");
}

inline std::string sweep_target_name(SweepTarget t) {
    switch (t) {
        case SweepTarget::RhoZa: return "rho_za";
        case SweepTarget::RhoRza: return "rho_rza";
        case SweepTarget::Epsilon: return "epsilon";
    }
    return {};
}

inline std::vector<double> default_sweep_grid(SweepTarget t) {
    switch (t) {
        case SweepTarget::RhoZa: return parse_grid("log:1e-5:1e-2:10");
        case SweepTarget::RhoRza: return parse_grid("log:1e-3:1:10");
        case SweepTarget::Epsilon: return {1, 2, 5, 10, 20, 25, 50};
    }
    return {};
}

enum class TheoryParam { Lambda, Mu, K, N, SnrDb, GammaZa };

inline TheoryParam parse_theory_param(const std::string& s) {
    if (s == "lambda") return TheoryParam::Lambda;
    if (s == "mu") return TheoryParam::Mu;
    if (s == "k") return TheoryParam::K;
    if (s == "n") return TheoryParam::N;
    if (s == "snr_db") return TheoryParam::SnrDb;
    if (s == "gamma_za") return TheoryParam::GammaZa;
    throw ValidationError("theory parameter must be one of lambda, mu, k, n, snr_db, gamma_za");
}

inline std::string theory_param_name(TheoryParam p) {
    constexpr const char* names[] = {"lambda", "mu", "k", "n", "snr_db", "gamma_za"};
    return names[static_cast<int>(p)];
}

inline std::vector<double> default_theory_grid(TheoryParam p) {
    switch (p) {
        case TheoryParam::Lambda: return parse_grid("log:1e-6:10:29");
        case TheoryParam::Mu: return parse_grid("log:1e-4:0.1:31");
        case TheoryParam::K: return parse_grid("lin:1:16:16");
        case TheoryParam::N: return parse_grid("lin:2:64:32");
        case TheoryParam::SnrDb: return parse_grid("lin:0:30:31");
        case TheoryParam::GammaZa: return parse_grid("log:1e-7:1e-2:26");
    }
    return {};
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

struct RunOptions {
    fs::path out_dir = "out";
    std::size_t threads = 1;
};

struct CommandResult {
    std::vector<std::string> outputs;  // file names relative to out_dir
    json summary;
};

namespace detail {

inline void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + path.string());
    os << content;
    os.flush();
    if (!os) throw IoError("failed writing " + path.string());
}

inline json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class F>
double or_nan(F&& f) {
    try {
        return f();
    } catch (const StabilityError&) {
        return std::numeric_limits<double>::quiet_NaN();
    } catch (const ValidationError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

}  // namespace detail

inline std::string curve_csv(const MseCurve& curve) {
    std::string s = "iteration,mse,mse_db\n";
    for (std::size_t i = 0; i < curve.values.size(); ++i)
        s += std::to_string(i) + ',' + format_real(curve.values[i]) + ',' + format_real(to_db(curve.values[i])) + '\n';
    return s;
}

inline std::string sweep_csv(const SweepResult& r) {
    std::string s = "value,steady_mse,steady_mse_db\n";
    for (std::size_t i = 0; i < r.grid.size(); ++i)
        s += format_real(r.grid[i]) + ',' + format_real(r.steady_mse[i]) + ',' + format_real(to_db(r.steady_mse[i])) + '\n';
    return s;
}

inline theory::SteadyStateInput theory_input(const ExperimentConfig& c) {
    theory::SteadyStateInput in;
    in.mu = c.params.mu;
    in.lambda = c.params.lambda;
    in.n_len = c.n_len;
    in.k_sparsity = c.k_sparsity;
    in.sigma_x_sq = c.signal_power;
    in.sigma_n_sq = c.noise_variance();
    in.gamma_za = c.params.mu * c.params.rho_za;
    return in;
}

struct TheoryRow {
    double beta_inf = NAN;
    double d_lms_mu = NAN;    // LMS at step mu
    double d_lms_mu_s = NAN;  // LMS at step mu_s
    double d_lmsf = NAN;
    double d_orc = NAN;
    double d_za_bound = NAN;
    bool stable = false;
};

inline TheoryRow theory_row(const theory::SteadyStateInput& in, double mu_s) {
    TheoryRow r;
    r.d_lms_mu = detail::or_nan([&] { return theory::lms_steady_mse(in.mu, in.n_len, in.sigma_n_sq, in.sigma_x_sq); });
    r.d_lms_mu_s = detail::or_nan([&] { return theory::lms_steady_mse(mu_s, in.n_len, in.sigma_n_sq, in.sigma_x_sq); });
    try {
        const auto rep = theory::lmsf_steady_mse(in);
        r.beta_inf = rep.beta_inf;
        r.d_lmsf = rep.d_predicted;
        r.d_orc = theory::mse_at_beta(rep.beta_inf, in.k_sparsity, in);
        r.d_za_bound = theory::za_steady_mse_bound(in);
        r.stable = true;
    } catch (const StabilityError&) {
    } catch (const ValidationError&) {
    }
    return r;
}

inline json theory_overlay(const ExperimentConfig& c) {
    const auto row = theory_row(theory_input(c), c.params.mu_s);
    return {{"beta_inf", detail::nullable(row.beta_inf)}, {"d_lms", detail::nullable(row.d_lms_mu_s)},
            {"d_lms_at_mu", detail::nullable(row.d_lms_mu)}, {"d_lmsf", detail::nullable(row.d_lmsf)},
            {"d_orc", detail::nullable(row.d_orc)},       {"d_za_bound", detail::nullable(row.d_za_bound)},
            {"stable", row.stable}};
}

inline json seed_info(const ExperimentConfig& c) {
    return {{"master_seed", c.master_seed},
            {"scheme", "trial_seed = splitmix64-combine(master_seed, trial); streams channel/signal/noise = "
                       "splitmix64-combine(trial_seed, 1/2/3); engine mt19937_64"}};
}

/// Writes manifest.json next to the outputs.
inline void write_manifest(const RunOptions& opt, const json& command, const ExperimentConfig& c,
                           const std::vector<std::string>& outputs, double seconds) {
    json m;
    m["tool_version"] = tool_version;
    m["command"] = command;
    m["config"] = config_to_json(c);
    m["master_seed"] = c.master_seed;
    m["threads"] = opt.threads;
    m["outputs"] = outputs;
    m["wall_clock_seconds"] = seconds;
    detail::write_file(opt.out_dir / "manifest.json", m.dump(2) + "\n");
}

namespace detail {
class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};
}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// One curve CSV per algorithm, summary.json, manifest.json.
inline CommandResult cmd_compare(const ExperimentConfig& c, const RunOptions& opt) {
    detail::Stopwatch clock;
    const auto algos = c.algorithms();
    const auto curves = run_algorithms(c, algos, opt.threads);

    CommandResult res;
    json list = json::array();
    for (std::size_t a = 0; a < algos.size(); ++a) {
        const std::string file = "curve_" + slug(algos[a]) + ".csv";
        detail::write_file(opt.out_dir / file, curve_csv(curves[a]));
        res.outputs.push_back(file);
        const double ss = steady_state_estimate(curves[a], c.tail_fraction);
        list.push_back({{"algo", label(algos[a])},
                        {"slug", slug(algos[a])},
                        {"file", file},
                        {"steady_state_mse", ss},
                        {"steady_state_mse_db", to_db(ss)}});
    }
    res.summary = {{"command", "compare"},       {"tool_version", tool_version},
                   {"config", config_to_json(c)}, {"config_digest", config_digest(c)},
                   {"curves", list},              {"theory", theory_overlay(c)},
                   {"seeds", seed_info(c)}};
    detail::write_file(opt.out_dir / "summary.json", res.summary.dump(2) + "\n");
    res.outputs.push_back("summary.json");
    write_manifest(opt, {{"name", "compare"}}, c, res.outputs, clock.seconds());
    return res;
}

inline SweepResult run_sweep(const ExperimentConfig& c, SweepTarget target, const std::vector<double>& grid,
                             std::size_t threads) {
    switch (target) {
        case SweepTarget::RhoZa: return sweep_regularization(c, SparseFamily::ZaLmsf, grid, threads);
        case SweepTarget::RhoRza: return sweep_regularization(c, SparseFamily::RzaLmsf, grid, threads);
        case SweepTarget::Epsilon: return sweep_reweight(c, grid, threads);
    }
    throw ValidationError("bad sweep target");
}

/// sweep_<target>.csv, summary.json (with argmin), manifest.json.
inline CommandResult cmd_sweep(const ExperimentConfig& c, SweepTarget target, const std::vector<double>& grid,
                               const RunOptions& opt) {
    detail::Stopwatch clock;
    const auto r = run_sweep(c, target, grid, opt.threads);
    const std::string name = sweep_target_name(target);
    const std::string file = "sweep_" + name + ".csv";

    CommandResult res;
    detail::write_file(opt.out_dir / file, sweep_csv(r));
    res.outputs.push_back(file);
    res.summary = {{"command", "sweep"},
                   {"tool_version", tool_version},
                   {"target", name},
                   {"file", file},
                   {"grid", r.grid},
                   {"steady_mse", r.steady_mse},
                   {"argmin", r.argmin()},
                   {"argmin_index", r.argmin_index},
                   {"min_steady_mse", r.steady_mse[r.argmin_index]},
                   {"config", config_to_json(c)},
                   {"config_digest", config_digest(c)},
                   {"seeds", seed_info(c)}};
    detail::write_file(opt.out_dir / "summary.json", res.summary.dump(2) + "\n");
    res.outputs.push_back("summary.json");
    write_manifest(opt, {{"name", "sweep"}, {"target", name}, {"grid", grid}}, c, res.outputs, clock.seconds());
    return res;
}

inline theory::SteadyStateInput with_param(theory::SteadyStateInput in, TheoryParam p, double v) {
    switch (p) {
        case TheoryParam::Lambda: in.lambda = v; break;
        case TheoryParam::Mu: in.mu = v; break;
        case TheoryParam::K: in.k_sparsity = static_cast<std::size_t>(std::llround(v)); break;
        case TheoryParam::N: in.n_len = static_cast<std::size_t>(std::llround(v)); break;
        case TheoryParam::SnrDb: in.sigma_n_sq = snr_to_noise_var(v); break;
        case TheoryParam::GammaZa: in.gamma_za = v; break;
    }
    return in;
}

/// theory_<param>.csv with one row per grid value; unstable rows carry
/// stable=0 and nan predictions instead of aborting.
inline CommandResult cmd_theory(const ExperimentConfig& c, TheoryParam param, const std::vector<double>& grid,
                                const RunOptions& opt) {
    detail::Stopwatch clock;
    if (grid.empty()) throw ValidationError("theory grid must not be empty");
    const auto base = theory_input(c);
    const std::string name = theory_param_name(param);
    const std::string file = "theory_" + name + ".csv";

    std::string csv = "value,beta_inf,d_lms_mu,d_lms_mu_s,d_lmsf,d_orc,d_za_bound,stable\n";
    std::size_t unstable = 0;
    for (double v : grid) {
        const auto row = theory_row(with_param(base, param, v), c.params.mu_s);
        unstable += !row.stable;
        csv += format_real(v) + ',' + format_real(row.beta_inf) + ',' + format_real(row.d_lms_mu) + ',' +
               format_real(row.d_lms_mu_s) + ',' + format_real(row.d_lmsf) + ',' + format_real(row.d_orc) + ',' +
               format_real(row.d_za_bound) + ',' + (row.stable ? "1" : "0") + '\n';
    }

    CommandResult res;
    detail::write_file(opt.out_dir / file, csv);
    res.outputs.push_back(file);
    res.summary = {{"command", "theory"}, {"tool_version", tool_version}, {"param", name},
                   {"file", file},        {"rows", grid.size()},          {"unstable_rows", unstable},
                   {"config", config_to_json(c)}};
    detail::write_file(opt.out_dir / "summary.json", res.summary.dump(2) + "\n");
    res.outputs.push_back("summary.json");
    write_manifest(opt, {{"name", "theory"}, {"param", name}, {"grid", grid}}, c, res.outputs, clock.seconds());
    return res;
}

enum class ChannelPreset { Random, VehicularB };

inline ChannelPreset parse_channel_preset(const std::string& s) {
    if (s == "random") return ChannelPreset::Random;
    if (s == "vehicular-b") return ChannelPreset::VehicularB;
    throw ValidationError("channel preset must be 'random' or 'vehicular-b'");
}

/// channel.csv (index,value). The random preset draws exactly the channel
/// used by trial `trial` of an experiment with the same config.
inline CommandResult cmd_channel(const ExperimentConfig& c, ChannelPreset preset, std::size_t trial,
                                 const RunOptions& opt) {
    detail::Stopwatch clock;
    auto rng = make_engine(trial_seed(c.master_seed, trial), Stream::Channel);
    const SparseChannel ch = preset == ChannelPreset::VehicularB
                                 ? vehicular_b_preset(rng)
                                 : gen_sparse_channel(c.n_len, c.k_sparsity, rng, c.normalize_channel);
    std::ostringstream os;
    write_channel_csv(os, ch);

    CommandResult res;
    detail::write_file(opt.out_dir / "channel.csv", os.str());
    res.outputs.push_back("channel.csv");
    json support = json::array();
    for (auto i : ch.support) support.push_back(i);
    res.summary = {{"command", "channel"},
                   {"tool_version", tool_version},
                   {"preset", preset == ChannelPreset::VehicularB ? "vehicular-b" : "random"},
                   {"trial", trial},
                   {"length", ch.length()},
                   {"support", support},
                   {"squared_norm", squared_norm(ch.taps)},
                   {"config", config_to_json(c)}};
    detail::write_file(opt.out_dir / "summary.json", res.summary.dump(2) + "\n");
    res.outputs.push_back("summary.json");
    write_manifest(opt,
                   {{"name", "channel"},
                    {"preset", preset == ChannelPreset::VehicularB ? "vehicular-b" : "random"},
                    {"trial", trial}},
                   c, res.outputs, clock.seconds());
    return res;
}

/// Re-executes the command recorded in a manifest.
inline CommandResult cmd_replay(const fs::path& manifest_path, const RunOptions& opt) {
    std::ifstream in(manifest_path);
    if (!in) throw ValidationError("cannot open manifest " + manifest_path.string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("manifest " + manifest_path.string() + ": " + e.what());
    }
    if (!m.contains("command") || !m.contains("config")) throw ValidationError("not a run manifest");
    const auto cfg = config_from_json(m.at("config")).config;
    const auto& cmd = m.at("command");
    const std::string name = cmd.at("name").get<std::string>();
    if (name == "compare") return cmd_compare(cfg, opt);
    if (name == "sweep")
        return cmd_sweep(cfg, parse_sweep_target(cmd.at("target").get<std::string>()),
                         cmd.at("grid").get<std::vector<double>>(), opt);
    if (name == "theory")
        return cmd_theory(cfg, parse_theory_param(cmd.at("param").get<std::string>()),
                          cmd.at("grid").get<std::vector<double>>(), opt);
    if (name == "channel")
        return cmd_channel(cfg, parse_channel_preset(cmd.at("preset").get<std::string>()),
                           cmd.at("trial").get<std::size_t>(), opt);
    throw ValidationError("unknown command '" + name + "' in manifest");
}

}  // namespace sfec::cli
