// Acceptance gate: one [PASS]/[FAIL] line per criterion.
//
//   sfec_acceptance            run all criteria
//   sfec_acceptance 3 7        run only criteria 3 and 7
//
// Exit status is nonzero when any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sfec/cli.hpp"

using namespace sfec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------
// 1, 2: steady-state orderings of the comparison set
// ---------------------------------------------------------------------------

Outcome ordering(std::size_t k) {
    const std::uint64_t seeds[] = {1, 2, 3};
    Outcome out{true, ""};
    for (auto seed : seeds) {
        ExperimentConfig c;
        c.k_sparsity = k;
        c.params = tuned_params(k);
        c.master_seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        const auto curves = compare_algorithms(c, workers());
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        // comparison_set order: LMS, ZA-LMS, RZA-LMS, LMS/F, ZA-LMS/F, RZA-LMS/F, LMF
        std::vector<double> ss;
        for (const auto& cv : curves) ss.push_back(steady_state_estimate(cv, c.tail_fraction));
        const double lms = ss[0], za_lms = ss[1], rza_lms = ss[2], lmsf = ss[3], za_lmsf = ss[4], rza_lmsf = ss[5];

        std::vector<std::string> broken;
        auto need = [&](bool ok, const char* what) {
            if (!ok) broken.push_back(what);
        };
        need(rza_lmsf < za_lmsf, "RZA-LMS/F<ZA-LMS/F");
        need(za_lmsf < lmsf, "ZA-LMS/F<LMS/F");
        need(rza_lms < za_lms, "RZA-LMS<ZA-LMS");
        need(za_lms < lms, "ZA-LMS<LMS");
        need(za_lmsf < za_lms, "ZA-LMS/F<ZA-LMS");
        need(rza_lmsf < rza_lms, "RZA-LMS/F<RZA-LMS");
        need(secs < 120.0, "runtime<120s");

        out.detail += "seed " + std::to_string(seed) + ": LMS " + g(lms) + ", ZA-LMS " + g(za_lms) + ", RZA-LMS " +
                      g(rza_lms) + ", LMS/F " + g(lmsf) + ", ZA-LMS/F " + g(za_lmsf) + ", RZA-LMS/F " + g(rza_lmsf) +
                      " (" + g(secs) + " s)";
        if (!broken.empty()) {
            out.pass = false;
            out.detail += " violated:";
            for (const auto& b : broken) out.detail += " " + b;
        }
        out.detail += "; ";
    }
    return out;
}

// ---------------------------------------------------------------------------
// 3: LMS/F fixed point against simulation
// ---------------------------------------------------------------------------

Outcome lmsf_theory_vs_sim() {
    ExperimentConfig c;
    c.signal = SignalKind::GaussianWhite;
    c.num_runs = 500;
    c.num_iterations = 5000;
    c.algos = {Lmsf{0.04, 0.8}};
    const double sim = steady_state_estimate(compare_algorithms(c, workers()).front(), c.tail_fraction);
    const double th = theory::lmsf_steady_mse(cli::theory_input(c)).d_predicted;
    const double rel = std::abs(sim - th) / th;
    return {rel <= 0.30, "simulated " + g(sim) + ", predicted " + g(th) + ", relative gap " + g(rel) + " (limit 0.3)"};
}

// ---------------------------------------------------------------------------
// 4: LMS closed form against simulation
// ---------------------------------------------------------------------------

Outcome lms_theory_vs_sim() {
    ExperimentConfig c;
    c.signal = SignalKind::GaussianWhite;
    c.num_runs = 200;
    c.num_iterations = 5000;
    c.algos = {Lms{0.005}};
    const double sim = steady_state_estimate(compare_algorithms(c, workers()).front(), c.tail_fraction);
    const double th = theory::lms_steady_mse(0.005, 16, 0.1, 1.0);
    const double rel = std::abs(sim - th) / th;
    return {rel <= 0.25, "simulated " + g(sim) + ", predicted " + g(th) + ", relative gap " + g(rel) + " (limit 0.25)"};
}

// ---------------------------------------------------------------------------
// 5: beta closed form against quadrature, monotonicity, endpoints
// ---------------------------------------------------------------------------

Outcome beta_consistency() {
    double worst = 0.0;
    bool mono_c = true, mono_q = true;
    double prev_c = std::numeric_limits<double>::infinity(), prev_q = prev_c;
    for (int i = 0; i < 50; ++i) {
        const double r = std::pow(10.0, -3.0 + 6.0 * i / 49.0);
        const double c = theory::beta_of_ratio(r), q = theory::beta_quadrature(r, 1.0);
        worst = std::max(worst, std::abs(c - q));
        mono_c = mono_c && c < prev_c;
        mono_q = mono_q && q < prev_q;
        prev_c = c;
        prev_q = q;
    }
    const double lo_c = theory::beta_of_ratio(1e-6), lo_q = theory::beta_quadrature(1e-6, 1.0);
    const double hi_c = theory::beta_of_ratio(1e6), hi_q = theory::beta_quadrature(1e6, 1.0);
    const bool agree = worst <= 1e-6;
    const bool low_end = lo_c > 0.999 && lo_q > 0.999;
    const bool high_end = hi_c < 1e-3 && hi_q < 1e-3;
    std::string d = "max |closed - quadrature| " + g(worst) + (agree ? "" : " (above 1e-6)") + "; monotone " +
                    (mono_c && mono_q ? "yes" : "no") + "; beta(1e-6) = " + g(lo_c) + " / " + g(lo_q) +
                    (low_end ? "" : " (not > 0.999)") + "; beta(1e6) = " + g(hi_c) + " / " + g(hi_q) +
                    (high_end ? "" : " (not < 1e-3)");
    return {agree && mono_c && mono_q && low_end && high_end, d};
}

// ---------------------------------------------------------------------------
// 6, 7: sweep optima
// ---------------------------------------------------------------------------

std::string sweep_table(const SweepResult& r) {
    std::string s;
    for (std::size_t i = 0; i < r.grid.size(); ++i) s += (i ? ", " : "") + g(r.grid[i]) + ":" + g(r.steady_mse[i]);
    return s;
}

bool interior(const SweepResult& r) {
    const double best = r.steady_mse[r.argmin_index];
    return best < r.steady_mse.front() && best < r.steady_mse.back();
}

Outcome regularization_optimum() {
    ExperimentConfig c;
    const auto za = sweep_regularization(c, SparseFamily::ZaLmsf, cli::parse_grid("log:1e-5:1e-2:10"), workers());
    const auto rza = sweep_regularization(c, SparseFamily::RzaLmsf, cli::parse_grid("log:1e-3:1:10"), workers());
    const bool za_near = std::abs(std::log10(za.argmin() / 4e-4)) <= 1.0;
    const bool rza_near = std::abs(std::log10(rza.argmin() / 0.06)) <= 1.0;
    const bool ok = za_near && interior(za) && rza_near && interior(rza);
    std::string d = "ZA-LMS/F argmin " + g(za.argmin()) + (za_near ? "" : " (not within a decade of 4e-4)") +
                    (interior(za) ? "" : " (endpoint)") + " [" + sweep_table(za) + "]; RZA-LMS/F argmin " +
                    g(rza.argmin()) + (rza_near ? "" : " (not within a decade of 0.06)") +
                    (interior(rza) ? "" : " (endpoint)") + " [" + sweep_table(rza) + "]";
    return {ok, d};
}

Outcome reweight_optimum() {
    ExperimentConfig c;
    const std::vector<double> grid{1, 2, 5, 10, 20, 25, 50};
    const auto r = sweep_reweight(c, grid, workers());
    const double best = r.argmin();
    const bool in_set = best == 10.0 || best == 20.0 || best == 25.0;
    const bool beats_one = r.steady_mse[4] < r.steady_mse[0];
    return {in_set && beats_one, "argmin " + g(best) + (in_set ? "" : " (not in {10, 20, 25})") + "; MSE(20) " +
                                     g(r.steady_mse[4]) + (beats_one ? " < " : " >= ") + "MSE(1) " +
                                     g(r.steady_mse[0]) + " [" + sweep_table(r) + "]"};
}

// ---------------------------------------------------------------------------
// 8: reduction identities
// ---------------------------------------------------------------------------

Outcome reductions() {
    const std::size_t n = 16;
    Engine rng(2024);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TapVector h(n);
    for (double& v : h) v = 0.3 * gauss(rng);

    auto run_pair = [&](const AlgoParams& a, const AlgoParams& b, std::size_t steps, double& worst) {
        FilterState sa(n), sb(n);
        for (std::size_t t = 0; t < steps; ++t) {
            TapVector x(n);
            for (double& v : x) v = gauss(rng);
            const double d = dot(h, x) + 0.3 * gauss(rng);
            step_in_place(sa, x, d, a);
            step_in_place(sb, x, d, b);
        }
        worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(sa.weights[i] - sb.weights[i]));
        return sa.weights == sb.weights;
    };

    double diff = 0.0;
    bool bitwise = true;
    std::string d;
    const std::pair<AlgoParams, AlgoParams> pairs[] = {
        {ZaLmsf{0.04, 0.8, 0.0}, Lmsf{0.04, 0.8}},
        {RzaLmsf{0.04, 0.8, 0.0, 20.0}, Lmsf{0.04, 0.8}},
        {ZaLms{0.008, 0.0}, Lms{0.008}},
        {RzaLms{0.008, 0.0, 20.0}, Lms{0.008}},
    };
    for (const auto& [a, b] : pairs) {
        const bool same = run_pair(a, b, 10000, diff);
        bitwise = bitwise && same;
        if (!same) d += label(a) + " differs from " + label(b) + " by " + g(diff) + "; ";
    }
    if (bitwise) d += "rho=0 variants bitwise equal over 1e4 steps; ";
    run_pair(Lmsf{0.04, 1e-12}, Lms{0.04}, 1000, diff);
    const bool close = diff <= 1e-9;
    d += "LMS/F(lambda=1e-12) vs LMS max tap gap " + g(diff) + (close ? "" : " (above 1e-9)");
    return {bitwise && close, d};
}

// ---------------------------------------------------------------------------
// 9: D_orc = (K/N) D_lmsf
// ---------------------------------------------------------------------------

Outcome oracle_identity() {
    double worst = 0.0;
    int points = 0;
    const double lambdas[] = {0.05, 0.8, 3.0, 10.0, 0.2};
    const double mus[] = {0.005, 0.02, 0.04, 0.06};
    const std::size_t lens[][2] = {{16, 1}, {16, 2}, {16, 4}, {32, 5}, {64, 7}};
    for (double lambda : lambdas)
        for (double mu : mus)
            for (const auto& nk : lens) {
                theory::SteadyStateInput in;
                in.lambda = lambda;
                in.mu = mu;
                in.n_len = nk[0];
                in.k_sparsity = nk[1];
                if (!(mu < theory::stability_bound(in.n_len, in.sigma_x_sq))) {
                    in.mu = 0.5 * theory::stability_bound(in.n_len, in.sigma_x_sq);
                }
                const auto rep = theory::lmsf_steady_mse(in);
                const double orc = theory::oracle_steady_mse(in);
                const double ratio = static_cast<double>(nk[1]) / static_cast<double>(nk[0]);
                worst = std::max(worst, std::abs(orc - ratio * rep.d_predicted) / (ratio * rep.d_predicted));
                ++points;
            }
    const double limit = 8.0 * std::numeric_limits<double>::epsilon();
    return {worst <= limit && points == 100,
            std::to_string(points) + " grid points, max relative deviation " + g(worst) + " (limit " + g(limit) + ")"};
}

// ---------------------------------------------------------------------------
// 10: zero-attractor bias on large support taps
// ---------------------------------------------------------------------------

Outcome za_bias() {
    // transient is over after ~2000 iterations; average the second half
    const std::size_t n = 16, runs = 50, iters = 20000, tail = iters / 2;
    const double mu = 0.04, lambda = 0.8, rho = 4e-4, sx2 = 1.0, sn2 = 0.1;
    const ZaLmsf algo{mu, lambda, rho};
    const double gamma = algo.gamma();

    TapVector h(n);
    h[2] = 0.7;
    h[9] = -0.7;
    const std::size_t support[] = {2, 9};

    theory::SteadyStateInput in;
    in.mu = mu;
    in.lambda = lambda;
    in.n_len = n;
    in.sigma_x_sq = sx2;
    in.sigma_n_sq = sn2;
    const double beta_inf = theory::lmsf_steady_mse(in).beta_inf;
    const auto predicted = theory::za_mean_bias(gamma, mu, beta_inf, sx2, sign_vec(h));

    double bias[2] = {0.0, 0.0};
    double beta_emp = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
        auto sig_rng = make_engine(trial_seed(99, r), Stream::Signal);
        auto noise_rng = make_engine(trial_seed(99, r), Stream::Noise);
        const auto x_all = gen_training_signal({SignalKind::GaussianWhite, iters, sx2}, sig_rng);
        FilterState s(n);
        for (std::size_t t = 0; t < iters; ++t) {
            const auto x = regressor(x_all, t, n);
            const double d = observe(h, x, NoiseSpec{sn2}, noise_rng);
            const auto rec = step_with_record(s, x, d, AlgoParams{algo});
            if (t >= iters - tail) {
                for (int j = 0; j < 2; ++j) bias[j] += s.weights[support[j]] - h[support[j]];
                beta_emp += rec.effective_step / mu;
            }
        }
    }
    const double count = static_cast<double>(runs * tail);
    beta_emp /= count;

    bool ok = true;
    std::string d;
    for (int j = 0; j < 2; ++j) {
        const double emp = bias[j] / count;
        const double pred = predicted[support[j]];
        const bool sign_ok = emp * h[support[j]] < 0.0;
        const double ratio = std::abs(emp) / std::abs(pred);
        const bool mag_ok = ratio >= 0.5 && ratio <= 2.0;
        ok = ok && sign_ok && mag_ok;
        d += "tap " + std::to_string(support[j]) + " (h=" + g(h[support[j]]) + "): bias " + g(emp) + " vs " +
             g(pred) + ", ratio " + g(ratio) + (sign_ok ? "" : " (wrong sign)") + (mag_ok ? "" : " (outside [0.5, 2])") +
             "; ";
    }
    d += "beta_inf theory " + g(beta_inf) + ", empirical " + g(beta_emp);
    return {ok, d};
}

// ---------------------------------------------------------------------------
// 11: manifest replay determinism across thread counts
// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    using namespace sfec::cli;
    std::random_device rd;
    const fs::path root = fs::temp_directory_path() / ("sfec_acceptance_" + std::to_string(rd()));
    fs::create_directories(root);

    ExperimentConfig c;
    c.num_runs = 100;
    c.num_iterations = 600;
    c.master_seed = 5;

    using Runner = std::function<CommandResult(const RunOptions&)>;
    const std::vector<std::pair<std::string, Runner>> commands = {
        {"compare", [&](const RunOptions& o) { return cmd_compare(c, o); }},
        {"sweep", [&](const RunOptions& o) { return cmd_sweep(c, SweepTarget::RhoZa, parse_grid("log:1e-5:1e-2:4"), o); }},
        {"theory", [&](const RunOptions& o) { return cmd_theory(c, TheoryParam::GammaZa, default_theory_grid(TheoryParam::GammaZa), o); }},
        {"channel", [&](const RunOptions& o) { return cmd_channel(c, ChannelPreset::Random, 17, o); }},
    };

    bool ok = true;
    std::string d;
    std::size_t files = 0;
    for (const auto& [name, run] : commands) {
        const fs::path base = root / name / "t1";
        const auto res = run({base, 1});
        for (std::size_t threads : {std::size_t{1}, std::size_t{8}}) {
            const fs::path dir = root / name / ("replay" + std::to_string(threads));
            cmd_replay(base / "manifest.json", {dir, threads});
            for (const auto& f : res.outputs) {
                ++files;
                if (slurp(base / f) != slurp(dir / f)) {
                    ok = false;
                    d += name + "/" + f + " differs at " + std::to_string(threads) + " threads; ";
                }
            }
        }
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    d += std::to_string(files) + " replayed files compared";
    return {ok, d};
}

struct Criterion {
    int id;
    const char* title;
    Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "K=2 steady-state ordering over 3 seeds", [] { return ordering(2); }},
        {2, "K=4 steady-state ordering over 3 seeds", [] { return ordering(4); }},
        {3, "LMS/F fixed point vs simulation within 30%", lmsf_theory_vs_sim},
        {4, "LMS closed form vs simulation within 25%", lms_theory_vs_sim},
        {5, "beta closed form vs quadrature, monotone, endpoints", beta_consistency},
        {6, "rho_za and rho_rza sweep optima", regularization_optimum},
        {7, "reweight factor optimum", reweight_optimum},
        {8, "reduction identities", reductions},
        {9, "D_orc = (K/N) D_lmsf", oracle_identity},
        {10, "zero-attractor mean bias", za_bias},
        {11, "replay determinism at 1 and 8 threads", determinism},
    };

    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    int failures = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("[%s] criterion %d: %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
