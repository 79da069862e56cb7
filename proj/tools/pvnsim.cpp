#include "pvn/harness.hpp"
#include "pvn/simd/kernels.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <iostream>

namespace {

struct RunOptions {
    std::string preset;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string out;
    unsigned threads = 0;
};

pvn::ExperimentSpec build_spec(const RunOptions& o) {
    pvn::ExperimentSpec spec = o.preset.empty() ? pvn::ExperimentSpec{} : pvn::load_preset(o.preset);
    if (!o.config.empty()) {
        pvn::apply_config_file(spec, o.config);
    }
    if (o.seed) {
        spec.master_seed = *o.seed;
    }
    if (o.trials) {
        spec.n_trials = *o.trials;
    }
    if (!o.out.empty()) {
        spec.output_dir = o.out;
    }
    if (spec.name.empty()) {
        spec.name = "custom";
    }
    spec.validate();
    return spec;
}

void add_common(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--preset", o.preset, "preset name (see 'list')");
    cmd->add_option("--config", o.config, "key = value file applied on top of the preset")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--trials", o.trials, "number of Monte Carlo trials")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Passive uplink sensing simulator"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "run an experiment and write CSV outputs");
    add_common(run, run_opts);
    run->add_option("--out", run_opts.out, "output directory");
    run->add_option("--threads", run_opts.threads, "worker threads, 0 for all cores");

    auto* list = app.add_subcommand("list", "list presets");
    bool show_config = false;
    list->add_flag("--show-config", show_config, "print each preset's configuration");

    RunOptions replay_opts;
    int replay_trial = 0;
    auto* replay = app.add_subcommand("replay", "rerun one trial in isolation and print its records");
    add_common(replay, replay_opts);
    replay->add_option("--trial", replay_trial, "trial index")->required()->check(CLI::NonNegativeNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto& name : pvn::list_presets()) {
                fmt::print("{}\n", name);
                if (show_config) {
                    fmt::print("{}\n", pvn::render_config(pvn::load_preset(name)));
                }
            }
            return 0;
        }
        if (*replay) {
            const auto spec = build_spec(replay_opts);
            const auto points = pvn::expand_sweep(spec);
            const auto records = pvn::run_trial(spec, points, replay_trial);
            std::cout << pvn::records_csv(points, records);
            return 0;
        }
        const auto spec = build_spec(run_opts);
        fmt::print(stderr, "{}: {} trials, kernels {}\n", spec.name, spec.n_trials,
                   pvn::simd::level_name(pvn::simd::active_level()));
        const auto start = std::chrono::steady_clock::now();
        const auto result = pvn::run_experiment(spec, run_opts.threads, [&](int t) {
            if ((t + 1) % 10 == 0) {
                fmt::print(stderr, "  trial {} done\n", t + 1);
            }
        });
        pvn::write_outputs(spec, result);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fmt::print(stderr, "wrote {} ({:.1f} s)\n", spec.output_dir.string(), secs);
        std::cout << pvn::summary_csv(result.points, result.summary);
    } catch (const pvn::ConfigError& e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return 2;
    }
    return 0;
}
