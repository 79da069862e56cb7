#pragma once

#include "pvn/ofdm.hpp"
#include "pvn/rv_estimator.hpp"
#include "pvn/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pvn {

enum class ExperimentKind { suppression, crlb, sync, association, sensing };
enum class Canceller { mti, rma };
enum class AssociationVariant { full, delay, doppler };

struct PipelineFlags {
    int g_d = 1;
    double rma_forgetting = 0.05;
    Window window = Window::rectangular;
    AssociationVariant association = AssociationVariant::full;
    int k_doppler = 5;
    int k_range = 25;
    int window_radius = 8;   ///< lag window of the synchronization bound
    bool sync_bound = false; ///< evaluate the theoretical synchronization MSE per trial
    int bound_points = 2048;
    int symbol_stride = 5;   ///< suppression curves are recorded every this many symbols
};

/// Optional sweep axes. An empty axis is not swept; the base configuration applies.
struct SweepAxes {
    std::vector<double> cfo_velocity;             ///< m/s, suppression experiments
    std::vector<Canceller> canceller;
    std::vector<int> g_d;                         ///< 0 means the clutter-free reference without cancellation
    std::vector<int> clutter_paths;               ///< total static reflectors
    std::vector<double> velocity_gap;             ///< m/s
    std::vector<Window> window;
    std::vector<AssociationVariant> association;
    std::vector<double> los_ratio;
};

struct ExperimentSpec {
    std::string name;
    ExperimentKind kind = ExperimentKind::sensing;
    SceneConfig scene;
    OfdmConfig ofdm;
    std::vector<double> snr_sweep{10.0};
    int n_trials = 200;
    std::uint64_t master_seed = 1;
    PipelineFlags flags;
    SweepAxes axes;
    std::filesystem::path output_dir = "out";

    void validate() const;
};

/// One combination of swept values.
struct SweepPoint {
    int index = 0;
    double snr_db = 0.0;
    std::optional<double> cfo_velocity;
    std::optional<Canceller> canceller;
    std::optional<int> g_d;
    std::optional<int> clutter_paths;
    std::optional<double> velocity_gap;
    std::optional<Window> window;
    std::optional<AssociationVariant> association;
    std::optional<double> los_ratio;

    /// Ordered (column, value) labels, identical key sets across the points of one experiment.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> labels() const;
};

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec);

struct TrialRecord {
    std::uint64_t seed = 0;
    int trial = 0;
    int point = 0;
    bool miss = false;
    std::vector<std::pair<std::string, double>> fields;

    void set(const std::string& key, double value);
    [[nodiscard]] std::optional<double> get(const std::string& key) const;
};

struct SummaryRow {
    int point = 0;
    int n_records = 0;
    int n_miss = 0;
    std::vector<std::pair<std::string, double>> mean;      ///< over non-miss records
    std::vector<std::pair<std::string, double>> std_error;
};

struct ExperimentResult {
    std::vector<SweepPoint> points;
    std::vector<TrialRecord> records;  ///< ordered by (trial, point)
    std::vector<SummaryRow> summary;
};

// ---- presets and configuration --------------------------------------------------------------------------

std::vector<std::string> list_presets();
ExperimentSpec load_preset(const std::string& name);

/// Applies "key = value" lines on top of an existing spec. Unknown keys raise ConfigError.
void apply_config_text(ExperimentSpec& spec, const std::string& text);
void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& file);
/// Canonical key=value rendering; feeding it back through apply_config_text reproduces the spec.
std::string render_config(const ExperimentSpec& spec);

std::string_view kind_name(ExperimentKind k);
std::string_view canceller_name(Canceller c);
std::string_view association_name(AssociationVariant a);

// ---- execution ------------------------------------------------------------------------------------------

/// Seed of trial i; every random draw of the trial derives from it.
std::uint64_t trial_seed(const ExperimentSpec& spec, int trial);

/// All records of one trial, one per sweep point. Pure function of (spec, trial).
std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, const std::vector<SweepPoint>& points, int trial);

/// Runs trials on worker threads (0 picks the hardware concurrency) and aggregates.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 0,
                                const std::function<void(int)>& on_trial_done = {});

std::vector<SummaryRow> summarize(const std::vector<SweepPoint>& points, const std::vector<TrialRecord>& records);

/// Writes results.csv, summary.csv, config.txt and plot_<name>.py into spec.output_dir.
void write_outputs(const ExperimentSpec& spec, const ExperimentResult& result);

std::string records_csv(const std::vector<SweepPoint>& points, const std::vector<TrialRecord>& records);
std::string summary_csv(const std::vector<SweepPoint>& points, const std::vector<SummaryRow>& rows);

}  // namespace pvn
