#include "pvn/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace pvn {
namespace {

constexpr int kMaxAttempts = 100000;
constexpr double kMinStandoff = 1.0;

double angle_from(Point2 origin, Point2 p) { return std::atan2(p.y - origin.y, p.x - origin.x); }

bool in_upper_half(const SceneConfig& s, Point2 p) { return p.y >= std::max(s.rru.y, s.ut.y); }

bool clear_of_nodes(const SceneConfig& s, Point2 p) {
    return distance(p, s.rru) >= kMinStandoff && distance(p, s.ut) >= kMinStandoff;
}

double two_hop_amplitude(const SceneConfig& s, const OfdmConfig& ofdm, double r1, double r2) {
    const double p_tx = std::pow(10.0, (s.tx_power_dbm - 30.0) / 10.0);
    return std::sqrt(p_tx * s.rcs) * ofdm.wavelength() / (std::pow(4.0 * kPi, 1.5) * r1 * r2);
}

Point2 draw_in_disc(Rng& rng, Point2 centre, double radius) {
    const double r = radius * std::sqrt(uniform(rng, {0.0, 1.0}));
    const double a = uniform(rng, {0.0, kTwoPi});
    return {centre.x + r * std::cos(a), centre.y + r * std::sin(a)};
}

bool gaps_ok(const std::vector<TargetTruth>& targets, double gap) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = i + 1; j < targets.size(); ++j) {
            if (std::abs(targets[i].projected_speed - targets[j].projected_speed) < gap) {
                return false;
            }
        }
    }
    return true;
}

std::vector<TargetTruth> draw_targets(const SceneConfig& s, Rng& rng) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<TargetTruth> targets;
        bool placed = true;
        for (int t = 0; t < s.n_targets && placed; ++t) {
            const double range = uniform(rng, s.target_range);
            const double doa = uniform(rng, s.target_doa);
            const double speed = uniform(rng, s.target_speed);
            const Point2 p{s.rru.x + range * std::cos(doa), s.rru.y + range * std::sin(doa)};
            placed = in_upper_half(s, p) && clear_of_nodes(s, p);
            targets.push_back({p, speed, speed * bisector_cosine(s, p)});
        }
        if (placed && gaps_ok(targets, s.min_velocity_gap)) {
            return targets;
        }
    }
    throw ConfigError("could not place targets satisfying the velocity gap");
}

Point2 draw_static(const SceneConfig& s, Rng& rng, Point2 centre) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        const Point2 p = draw_in_disc(rng, centre, s.static_scatter_radius);
        if (in_upper_half(s, p) && clear_of_nodes(s, p)) {
            return p;
        }
    }
    throw ConfigError("could not place a static reflector near a target");
}

}  // namespace

void SceneConfig::validate() const {
    if (n_targets < 1) {
        throw ConfigError("need at least one target");
    }
    if (!target_speed.valid() || !target_range.valid() || !statics_per_target.valid() || !target_doa.valid() ||
        !cfo_velocity.valid() || !to_range.valid()) {
        throw ConfigError("interval with lower bound above upper bound");
    }
    if (statics_per_target.lo < 0 || (total_statics && *total_statics < 0)) {
        throw ConfigError("static reflector count must be non-negative");
    }
    if (static_scatter_radius <= 0.0) {
        throw ConfigError("static scatter radius must be positive");
    }
    if (rcs <= 0.0) {
        throw ConfigError("rcs must be positive");
    }
    if (target_speed.lo < 0.0 || min_velocity_gap < 0.0) {
        throw ConfigError("speeds and gaps must be non-negative");
    }
    if (target_doa.lo < 0.0 || target_doa.hi > kPi) {
        throw ConfigError("target angles must lie in [0, pi]");
    }
    if (los_ratio && *los_ratio < 0.0) {
        throw ConfigError("direct-path power ratio must be non-negative");
    }
}

double bisector_cosine(const SceneConfig& s, Point2 p) {
    const double r1 = distance(p, s.ut);
    const double r2 = distance(p, s.rru);
    const double ux = (p.x - s.ut.x) / r1 + (p.x - s.rru.x) / r2;
    const double uy = (p.y - s.ut.y) / r1 + (p.y - s.rru.y) / r2;
    return 0.5 * std::hypot(ux, uy);
}

PathParam path_from_geometry(const SceneConfig& s, const OfdmConfig& ofdm, Point2 p, double speed, bool is_static) {
    const double r1 = distance(p, s.ut);
    const double r2 = distance(p, s.rru);
    if (r1 <= 0.0 || r2 <= 0.0) {
        throw ConfigError("scatterer collocated with a node");
    }
    PathParam path;
    path.delay = (r1 + r2) / kSpeedOfLight;
    if (path.delay > ofdm.max_delay()) {
        throw ConfigError("path delay exceeds the cyclic prefix");
    }
    path.doa = angle_from(s.rru, p);
    path.aod = angle_from(s.ut, p);
    path.is_static = is_static;
    path.doppler = is_static ? 0.0 : 2.0 * speed * bisector_cosine(s, p) * ofdm.f_c / kSpeedOfLight;
    path.gain = two_hop_amplitude(s, ofdm, r1, r2) * expj(-kTwoPi * ofdm.f_c * path.delay);
    return path;
}

double cfo_from_velocity(double velocity, const OfdmConfig& ofdm) {
    return 2.0 * velocity * ofdm.f_c / kSpeedOfLight;
}

double to_from_range(double range) { return range / kSpeedOfLight; }

OffsetState draw_offsets(const SceneConfig& s, const OfdmConfig& ofdm, Rng& rng) {
    OffsetState o;
    o.cfo = cfo_from_velocity(uniform(rng, s.cfo_velocity), ofdm);
    o.to = to_from_range(uniform(rng, s.to_range));
    return o;
}

Scene generate_scene(const SceneConfig& s, const OfdmConfig& ofdm) {
    s.validate();
    ofdm.validate();
    Rng rng = make_rng(s.rng_seed);
    Scene scene;
    scene.targets = draw_targets(s, rng);

    std::vector<int> statics(scene.targets.size());
    if (s.total_statics) {
        for (int i = 0; i < *s.total_statics; ++i) {
            ++statics[static_cast<std::size_t>(i) % statics.size()];
        }
    } else {
        for (int& n : statics) {
            n = uniform_int(rng, s.statics_per_target);
        }
    }

    for (std::size_t t = 0; t < scene.targets.size(); ++t) {
        const TargetTruth& target = scene.targets[t];
        PathParam moving = path_from_geometry(s, ofdm, target.position, target.speed, false);
        moving.cluster = static_cast<int>(t);
        scene.paths.push_back(moving);
        for (int k = 0; k < statics[t]; ++k) {
            PathParam fixed = path_from_geometry(s, ofdm, draw_static(s, rng, target.position), 0.0, true);
            fixed.cluster = static_cast<int>(t);
            scene.paths.push_back(fixed);
        }
    }

    if (s.los_ratio) {
        double nlos_power = 0.0;
        for (const PathParam& p : scene.paths) {
            nlos_power += std::norm(p.gain);
        }
        PathParam los;
        los.delay = distance(s.ut, s.rru) / kSpeedOfLight;
        los.doa = std::abs(angle_from(s.rru, s.ut));
        los.aod = std::abs(angle_from(s.ut, s.rru));
        los.is_static = true;
        los.gain = std::sqrt(*s.los_ratio * nlos_power) * expj(-kTwoPi * ofdm.f_c * los.delay);
        scene.paths.push_back(los);
    }

    scene.offsets = draw_offsets(s, ofdm, rng);
    return scene;
}

std::vector<PathParam> moving_paths(const std::vector<PathParam>& paths) {
    std::vector<PathParam> out;
    std::copy_if(paths.begin(), paths.end(), std::back_inserter(out), [](const PathParam& p) { return !p.is_static; });
    return out;
}

std::vector<PathParam> static_paths(const std::vector<PathParam>& paths) {
    std::vector<PathParam> out;
    std::copy_if(paths.begin(), paths.end(), std::back_inserter(out), [](const PathParam& p) { return p.is_static; });
    return out;
}

}  // namespace pvn
