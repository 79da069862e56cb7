#include "pvn/harness.hpp"

#include <limits>

namespace pvn {
namespace {

const std::vector<double> kSnrSweep{-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};

ExperimentSpec base(const std::string& name, ExperimentKind kind) {
    ExperimentSpec s;
    s.name = name;
    s.kind = kind;
    s.output_dir = "out/" + name;
    return s;
}

}  // namespace

std::vector<std::string> list_presets() { return {"fig5", "fig6", "fig7", "fig8", "fig10", "fig11"}; }

ExperimentSpec load_preset(const std::string& name) {
    ExperimentSpec s;
    if (name == "fig5") {
        s = base(name, ExperimentKind::suppression);
        s.snr_sweep = {std::numeric_limits<double>::infinity()};
        s.axes.cfo_velocity = {1.0, 2.0, 3.0, 4.0, 5.0};
        s.axes.canceller = {Canceller::mti, Canceller::rma};
        s.flags.g_d = 1;
        s.flags.rma_forgetting = 0.05;
    } else if (name == "fig6") {
        s = base(name, ExperimentKind::crlb);
        s.snr_sweep = kSnrSweep;
        s.axes.g_d = {0, 1, 5, 10};
    } else if (name == "fig7") {
        s = base(name, ExperimentKind::sync);
        s.snr_sweep = kSnrSweep;
        s.axes.clutter_paths = {3, 9, 15};
        s.flags.window = Window::hamming;
    } else if (name == "fig8") {
        s = base(name, ExperimentKind::sync);
        s.snr_sweep = kSnrSweep;
        s.axes.clutter_paths = {15};
        s.flags.window = Window::hamming;
        s.flags.sync_bound = true;
    } else if (name == "fig10") {
        s = base(name, ExperimentKind::association);
        s.snr_sweep = {10.0};
        s.axes.velocity_gap = {0.0, 1.0, 2.0, 3.0, 4.0};
        s.axes.window = {Window::rectangular, Window::hamming};
        s.axes.association = {AssociationVariant::full, AssociationVariant::delay, AssociationVariant::doppler};
    } else if (name == "fig11") {
        s = base(name, ExperimentKind::sensing);
        s.snr_sweep = kSnrSweep;
        s.axes.los_ratio = {0.1, 1.0, 10.0};
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    s.validate();
    return s;
}

}  // namespace pvn
