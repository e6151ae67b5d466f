// sfec: sparse LMS/F channel-estimation experiments from the command line.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "sfec/cli.hpp"

namespace {

std::optional<std::string> getenv_opt(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

enum Exit { Ok = 0, ExperimentFailed = 1, BadUsage = 2, IoFailed = 3 };

}  // namespace

int main(int argc, char** argv) {
    using namespace sfec::cli;

    CLI::App app{"Adaptive sparse channel estimation experiments (LMS/F family)"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_path;
    std::map<std::string, std::string> values;
    std::optional<std::string> out_dir;
    std::optional<std::size_t> threads;

    app.add_option("--config", config_path, "JSON config file or run manifest");
    for (const auto& key : config_keys()) {
        const std::string name = key.name;
        app.add_option_function<std::string>(
            flag_name(name), [&values, name](const std::string& v) { values[name] = v; },
            "override '" + name + "' (env " + env_name(name) + ")");
    }
    app.add_option("--out", out_dir, "output directory (env SFEC_OUT, default ./out)");
    app.add_option("--threads", threads, "worker threads; results do not depend on it (env SFEC_THREADS)");

    auto* compare = app.add_subcommand("compare", "Monte-Carlo learning curves of the algorithm set");

    auto* sweep = app.add_subcommand("sweep", "steady-state MSE over a parameter grid");
    std::string sweep_target = "rho_za";
    std::optional<std::string> sweep_grid;
    sweep->add_option("--target", sweep_target, "rho_za | rho_rza | epsilon")->capture_default_str();
    sweep->add_option("--grid", sweep_grid, "a,b,c | log:lo:hi:count | lin:lo:hi:count");

    auto* theory = app.add_subcommand("theory", "closed-form steady-state predictions over a grid");
    std::string theory_param = "lambda";
    std::optional<std::string> theory_grid;
    theory->add_option("--param", theory_param, "lambda | mu | k | n | snr_db | gamma_za")->capture_default_str();
    theory->add_option("--grid", theory_grid, "a,b,c | log:lo:hi:count | lin:lo:hi:count");

    auto* channel = app.add_subcommand("channel", "dump one channel realization");
    std::string preset = "random";
    std::size_t trial = 0;
    channel->add_option("--preset", preset, "random | vehicular-b")->capture_default_str();
    channel->add_option("--trial", trial, "trial index whose channel to draw")->capture_default_str();

    auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    std::string manifest;
    replay->add_option("manifest", manifest, "manifest.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunOptions opt;
        if (out_dir)
            opt.out_dir = *out_dir;
        else if (auto e = getenv_opt("SFEC_OUT"))
            opt.out_dir = *e;
        if (threads)
            opt.threads = *threads;
        else if (auto e = getenv_opt("SFEC_THREADS"))
            opt.threads = std::stoul(*e);

        CommandResult res;
        if (replay->parsed()) {
            res = cmd_replay(manifest, opt);
        } else {
            ConfigSources src;
            if (config_path) src.file = *config_path;
            src.flags = values;
            src.env = getenv_opt;
            const auto resolved = parse_config(src);
            for (const auto& w : resolved.warnings) std::cerr << "warning: " << w << '\n';
            const auto& cfg = resolved.config;

            if (compare->parsed()) {
                res = cmd_compare(cfg, opt);
            } else if (sweep->parsed()) {
                const auto target = parse_sweep_target(sweep_target);
                res = cmd_sweep(cfg, target, sweep_grid ? parse_grid(*sweep_grid) : default_sweep_grid(target), opt);
            } else if (theory->parsed()) {
                const auto param = parse_theory_param(theory_param);
                res = cmd_theory(cfg, param, theory_grid ? parse_grid(*theory_grid) : default_theory_grid(param), opt);
            } else if (channel->parsed()) {
                res = cmd_channel(cfg, parse_channel_preset(preset), trial, opt);
            }
        }
        for (const auto& f : res.outputs) std::cout << (opt.out_dir / f).string() << '\n';
        std::cout << (opt.out_dir / "manifest.json").string() << '\n';
        return Ok;
    } catch (const sfec::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExperimentFailed;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return IoFailed;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return BadUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExperimentFailed;
    }
}
