#pragma once

#include "pvn/ofdm.hpp"
#include "pvn/rng.hpp"
#include "pvn/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pvn {

/// One propagation path as seen by the receiver array.
struct PathParam {
    cd gain;             ///< h * exp(-j 2 pi f_c delay)
    double doa = 0.0;    ///< arrival angle at the receiver array, radians
    double aod = 0.0;    ///< departure angle at the transmitter array, radians
    double delay = 0.0;  ///< geometric delay, seconds
    double doppler = 0.0;
    bool is_static = true;
    int cluster = -1;    ///< owning target index; -1 for the direct path
};

/// Oscillator mismatch between transmitter and receiver.
struct OffsetState {
    double cfo = 0.0;  ///< Hz
    double to = 0.0;   ///< seconds
    [[nodiscard]] double xi(const OfdmConfig& cfg) const { return cfg.normalize(cfo); }
};

struct SceneConfig {
    Point2 rru{0.0, 0.0};
    Point2 ut{80.0, 0.0};
    int n_targets = 3;
    Interval target_speed{0.0, 40.0};
    Interval target_range{20.0, 90.0};
    IntInterval statics_per_target{2, 7};
    double static_scatter_radius = 8.0;
    double rcs = 1.0;
    double tx_power_dbm = 25.0;
    std::uint64_t rng_seed = 1;

    Interval target_doa{0.0, kPi};
    /// CFO drawn as the Doppler of a monostatic velocity in this interval.
    Interval cfo_velocity{15.0, 65.0};
    /// TO drawn as the propagation time over a range in this interval.
    Interval to_range{55.0, 95.0};
    /// Minimum pairwise gap between projected target velocities.
    double min_velocity_gap = 0.0;
    /// When set, the total number of static reflectors, dealt round-robin over targets.
    std::optional<int> total_statics;
    /// When set, adds the UT-to-RRU direct path with this power relative to all other paths.
    std::optional<double> los_ratio;

    void validate() const;
};

struct TargetTruth {
    Point2 position;
    double speed = 0.0;
    double projected_speed = 0.0;  ///< speed times the cosine of the bistatic half-angle
};

struct Scene {
    std::vector<PathParam> paths;
    OffsetState offsets;
    std::vector<TargetTruth> targets;
};

/// Path for a point scatterer moving with the given speed along the inward bistatic bisector.
PathParam path_from_geometry(const SceneConfig& scene, const OfdmConfig& ofdm, Point2 point, double speed,
                             bool is_static);

/// Cosine of the bistatic half-angle at the given point.
double bisector_cosine(const SceneConfig& scene, Point2 point);

Scene generate_scene(const SceneConfig& scene, const OfdmConfig& ofdm);

OffsetState draw_offsets(const SceneConfig& scene, const OfdmConfig& ofdm, Rng& rng);

/// CFO in Hz equivalent to the Doppler of a monostatic target at this velocity.
double cfo_from_velocity(double velocity, const OfdmConfig& ofdm);
/// TO in seconds equivalent to propagation over this range.
double to_from_range(double range);

std::vector<PathParam> moving_paths(const std::vector<PathParam>& paths);
std::vector<PathParam> static_paths(const std::vector<PathParam>& paths);

}  // namespace pvn
