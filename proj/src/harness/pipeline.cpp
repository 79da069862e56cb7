#include "pvn/harness.hpp"

#include "pvn/analysis.hpp"
#include "pvn/doa.hpp"
#include "pvn/preprocess.hpp"
#include "pvn/sync.hpp"
#include "pvn/waveform.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace pvn {
namespace {

constexpr std::uint64_t kSceneSalt = 1;
constexpr std::uint64_t kNoiseSalt = 2;
constexpr std::uint64_t kBoundSalt = 3;

struct TargetTrack {
    double range = 0.0;     ///< bistatic path length, m
    double velocity = 0.0;  ///< projected speed, m/s
    double doa = 0.0;
};

std::string scene_key(const SweepPoint& p) {
    return fmt::format("{}|{}|{}", p.clutter_paths.value_or(-1), p.velocity_gap.value_or(-1.0),
                       p.los_ratio.value_or(-1.0));
}

std::uint64_t key_hash(const std::string& key) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : key) {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return h;
}

Scene make_scene(const ExperimentSpec& spec, const SweepPoint& p, int trial) {
    SceneConfig sc = spec.scene;
    if (p.clutter_paths) {
        sc.total_statics = *p.clutter_paths;
    }
    if (p.velocity_gap) {
        sc.min_velocity_gap = *p.velocity_gap;
    }
    if (p.los_ratio) {
        sc.los_ratio = *p.los_ratio;
    }
    sc.rng_seed = stream_seed(trial_seed(spec, trial), key_hash(scene_key(p)), kSceneSalt);
    return generate_scene(sc, spec.ofdm);
}

Rng noise_rng(const ExperimentSpec& spec, int trial) { return make_rng(stream_seed(trial_seed(spec, trial), 0, kNoiseSalt)); }

std::vector<TargetTrack> truth_tracks(const Scene& scene, const OfdmConfig& cfg) {
    std::vector<TargetTrack> out;
    for (const PathParam& p : scene.paths) {
        if (!p.is_static) {
            out.push_back({p.delay * kSpeedOfLight, p.doppler * kSpeedOfLight / (2.0 * cfg.f_c), p.doa});
        }
    }
    return out;
}

/// Estimates as (range, projected speed): the spectrum axis measures the bistatic range rate.
std::vector<TargetTrack> to_tracks(const std::vector<RangeVelocity>& rv) {
    std::vector<TargetTrack> out;
    for (const RangeVelocity& e : rv) {
        out.push_back({e.range, 0.5 * e.velocity, 0.0});
    }
    return out;
}

/// Assignment of estimates to truths minimizing the summed normalized squared distance.
std::vector<int> match(const std::vector<TargetTrack>& est, const std::vector<TargetTrack>& truth, double r_unit,
                       double v_unit) {
    const auto cost = [&](std::size_t e, std::size_t t) {
        const double dr = (est[e].range - truth[t].range) / r_unit;
        const double dv = (est[e].velocity - truth[t].velocity) / v_unit;
        return dr * dr + dv * dv;
    };
    std::vector<int> perm(truth.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    if (truth.size() <= 7 && est.size() == truth.size()) {
        double best_cost = std::numeric_limits<double>::infinity();
        do {
            double c = 0.0;
            for (std::size_t e = 0; e < est.size(); ++e) {
                c += cost(e, static_cast<std::size_t>(perm[e]));
            }
            if (c < best_cost) {
                best_cost = c;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }
    std::vector<bool> used(truth.size(), false);
    best.assign(est.size(), -1);
    for (std::size_t e = 0; e < est.size(); ++e) {
        double bc = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < truth.size(); ++t) {
            if (!used[t] && cost(e, t) < bc) {
                bc = cost(e, t);
                best[e] = static_cast<int>(t);
            }
        }
        if (best[e] >= 0) {
            used[static_cast<std::size_t>(best[e])] = true;
        }
    }
    return best;
}

void record_tracking_errors(TrialRecord& rec, const std::vector<TargetTrack>& est,
                            const std::vector<TargetTrack>& truth, const OfdmConfig& cfg, int g_eff) {
    const auto assignment = match(est, truth, range_unit(cfg), velocity_unit(cfg, g_eff));
    double se_r = 0.0;
    double se_v = 0.0;
    int n = 0;
    for (std::size_t e = 0; e < est.size(); ++e) {
        const int t = assignment[e];
        if (t < 0) {
            continue;
        }
        const TargetTrack& tr = truth[static_cast<std::size_t>(t)];
        se_r += std::pow(est[e].range - tr.range, 2);
        se_v += std::pow(est[e].velocity - tr.velocity, 2);
        rec.set(fmt::format("true_range_{}", t), tr.range);
        rec.set(fmt::format("est_range_{}", t), est[e].range);
        rec.set(fmt::format("true_velocity_{}", t), tr.velocity);
        rec.set(fmt::format("est_velocity_{}", t), est[e].velocity);
        ++n;
    }
    rec.set("sq_err_range", n > 0 ? se_r / n : std::nan(""));
    rec.set("sq_err_velocity", n > 0 ? se_v / n : std::nan(""));
}

double to_db(double ratio) { return 10.0 * std::log10(std::max(ratio, 1e-300)); }

// ---- clutter suppression ----------------------------------------------------------------------------

class SuppressionTrial {
public:
    SuppressionTrial(const ExperimentSpec& spec, int trial) : spec_(spec), trial_(trial) {}

    void run(const SweepPoint& p, TrialRecord& rec) {
        const double v = p.cfo_velocity.value_or(0.0);
        const Stacks& st = stacks(p, v);
        const int g_d = p.g_d.value_or(spec_.flags.g_d);
        const Canceller c = p.canceller.value_or(Canceller::mti);
        const auto cancelled_power = [&](const CompensatedStack& s) {
            return c == Canceller::mti ? mti_power(s, g_d) : rma_power(s, spec_.flags.rma_forgetting);
        };
        const int lag = c == Canceller::mti ? g_d : 0;
        const std::vector<double> clutter_after = cancelled_power(st.clutter);
        const std::vector<double> target_after = cancelled_power(st.target);
        const std::vector<double> ratio =
            suppression_ratio(SuppressionPowers{st.clutter_power, st.target_power, clutter_after, target_after, lag});
        const int stride = spec_.flags.symbol_stride;
        for (int count = stride; count <= spec_.ofdm.g_symbols; count += stride) {
            const int s = count - 1 - lag;
            rec.set(fmt::format("ratio_db_{}", count), s >= 0 ? to_db(ratio[static_cast<std::size_t>(s)]) : std::nan(""));
        }
        rec.set("ratio_db_mean", to_db(std::accumulate(ratio.begin(), ratio.end(), 0.0) / static_cast<double>(ratio.size())));
    }

private:
    struct Stacks {
        CompensatedStack clutter;
        CompensatedStack target;
        std::vector<double> clutter_power;
        std::vector<double> target_power;
    };

    const Stacks& stacks(const SweepPoint& p, double v) {
        const std::string key = scene_key(p) + fmt::format("|{}", v);
        if (cache_key_ != key) {
            const Scene scene = make_scene(spec_, p, trial_);
            const OffsetState offsets{cfo_from_velocity(v, spec_.ofdm), 0.0};
            const CVector w = default_precoder(spec_.ofdm.m_u);
            const auto statics = static_paths(scene.paths);
            const auto movers = moving_paths(scene.paths);
            cached_ = Stacks{};
            const auto fill = [&](const std::vector<PathParam>& paths, CompensatedStack& out) {
                if (paths.empty()) {
                    out.hat_y.assign(spec_.ofdm.g_symbols, CMatrix::Zero(spec_.ofdm.m_r, spec_.ofdm.n_sub));
                    return;
                }
                const ChannelBasis basis(spec_.ofdm, paths, offsets, w);
                for (int g = 0; g < spec_.ofdm.g_symbols; ++g) {
                    out.hat_y.push_back(basis.frame(g));
                }
            };
            fill(statics, cached_.clutter);
            fill(movers, cached_.target);
            for (int g = 0; g < spec_.ofdm.g_symbols; ++g) {
                cached_.clutter_power.push_back(cached_.clutter.hat_y[static_cast<std::size_t>(g)].squaredNorm());
                cached_.target_power.push_back(cached_.target.hat_y[static_cast<std::size_t>(g)].squaredNorm());
            }
            cache_key_ = key;
        }
        return cached_;
    }

    const ExperimentSpec& spec_;
    int trial_;
    std::string cache_key_;
    Stacks cached_;
};

// ---- range-velocity accuracy against the bound ------------------------------------------------------

void run_crlb_point(const ExperimentSpec& spec, const SweepPoint& p, int trial, TrialRecord& rec) {
    const int g_d = p.g_d.value_or(spec.flags.g_d);
    Scene scene = make_scene(spec, p, trial);
    scene.offsets = {};
    const std::vector<PathParam> paths = g_d == 0 ? moving_paths(scene.paths) : scene.paths;
    const CVector w = default_precoder(spec.ofdm.m_u);
    Rng rng = noise_rng(spec, trial);
    const FrameStack frames = synthesize_frames(spec.ofdm, paths, scene.offsets, Decibel{p.snr_db}, w, rng);
    const CompensatedStack comp = compensate(frames);
    const std::vector<CMatrix> stack = g_d == 0 ? comp.hat_y : mti_cancel(comp, g_d).breve_y;
    const int m = select_antenna(stack);
    const Window window = p.window.value_or(spec.flags.window);
    const DelayDopplerSpectrum spec_grid =
        spectrum(stack_antenna_row(stack, m), spec.flags.k_doppler, spec.flags.k_range, window, spec.ofdm);

    const auto movers = moving_paths(scene.paths);
    if (frames.noise_var > 0.0) {
        const CrlbResult bound = crlb(movers, antenna_amplitudes(movers, scene.offsets, w, spec.ofdm, m), spec.ofdm,
                                      g_d, frames.noise_var);
        double br = 0.0;
        double bv = 0.0;
        for (const PathBound& b : bound.per_path_bounds) {
            br += b.var_range;
            bv += b.var_velocity;
        }
        rec.set("crlb_range", br / static_cast<double>(bound.per_path_bounds.size()));
        rec.set("crlb_velocity", bv / static_cast<double>(bound.per_path_bounds.size()));
    }
    const PeakSet peaks = find_peaks(spec_grid, static_cast<int>(movers.size()));
    record_tracking_errors(rec, to_tracks(map_to_physical(peaks, spec_grid, spec.ofdm)), truth_tracks(scene, spec.ofdm),
                           spec.ofdm, spec_grid.g_eff);
}

// ---- synchronization ---------------------------------------------------------------------------------

struct SyncOutcome {
    SyncEstimate cmcc;
    SyncEstimate scmcc;
    Fingerprint fingerprint;
    int antenna = 0;
    double noise_var = 0.0;
    CompensatedStack updated;
};

SyncOutcome synchronize(const ExperimentSpec& spec, const Scene& scene, double snr_db, Window window, int trial) {
    const CVector w = default_precoder(spec.ofdm.m_u);
    Rng rng = noise_rng(spec, trial);
    const FrameStack calibration = synthesize_frames(spec.ofdm, scene.paths, OffsetState{}, Decibel{snr_db}, w, rng);
    const FrameStack updated = synthesize_frames(spec.ofdm, scene.paths, scene.offsets, Decibel{snr_db}, w, rng);
    SyncOutcome out;
    const CompensatedStack cal = compensate(calibration);
    out.updated = compensate(updated);
    out.antenna = select_antenna(cal.hat_y);
    out.noise_var = calibration.noise_var;
    const auto grid = [&](const CompensatedStack& s) {
        return spectrum(stack_antenna_row(s.hat_y, out.antenna), spec.flags.k_doppler, spec.flags.k_range, window,
                        spec.ofdm);
    };
    const DelayDopplerSpectrum cal_grid = grid(cal);
    const DelayDopplerSpectrum upd_grid = grid(out.updated);
    out.fingerprint = capture_fingerprint(cal_grid, spec.ofdm, trial);
    out.cmcc = cmcc_estimate(out.fingerprint, upd_grid, spec.ofdm);
    out.scmcc = scmcc_estimate(out.fingerprint, upd_grid, spec.ofdm);
    return out;
}

void record_sync_errors(TrialRecord& rec, const std::string& tag, const SyncEstimate& est, const OffsetState& truth,
                        const OfdmConfig& cfg) {
    const double er = kSpeedOfLight * (truth.to - est.d_tau);
    const double ev = kSpeedOfLight * cfg.delta_f * (truth.xi(cfg) - est.d_xi) / (2.0 * cfg.f_c);
    rec.set("sq_err_range_" + tag, er * er);
    rec.set("sq_err_velocity_" + tag, ev * ev);
}

double noise_free_bound(const ExperimentSpec& spec, const Scene& scene, const SyncOutcome& sync, Window window,
                        int trial) {
    const CVector w = default_precoder(spec.ofdm.m_u);
    const auto noise_free_grid = [&](const OffsetState& offsets) {
        const ChannelBasis basis(spec.ofdm, scene.paths, offsets, w);
        CMatrix gamma(spec.ofdm.g_symbols, spec.ofdm.n_sub);
        for (int g = 0; g < spec.ofdm.g_symbols; ++g) {
            gamma.row(g) = basis.frame(g).row(sync.antenna);
        }
        return spectrum(gamma, spec.flags.k_doppler, spec.flags.k_range, window, spec.ofdm);
    };
    const DelayDopplerSpectrum cal = noise_free_grid(OffsetState{});
    const DelayDopplerSpectrum upd = noise_free_grid(scene.offsets);
    const Eigen::Index q_b = cal.cols() / 2;
    const auto shift = static_cast<Eigen::Index>(
        std::lround(scene.offsets.xi(spec.ofdm) * spec.ofdm.n_s() * static_cast<double>(cal.rows()) / spec.ofdm.n_sub));
    const Eigen::Index k_c = sync.fingerprint.k_c;
    const Eigen::Index k_up = ((k_c + shift) % upd.rows() + upd.rows()) % upd.rows();
    const CVector s1 = cal.grid.row(k_c).head(q_b).transpose();
    const CVector s2 = upd.grid.row(k_up).head(q_b).transpose();
    const std::vector<cd> rho = spectrum_row_noise(cal, sync.noise_var);
    MvnOptions opt;
    opt.points = spec.flags.bound_points;
    opt.seed = stream_seed(trial_seed(spec, trial), 0, kBoundSalt);
    return sync_mse_bound({s1.data(), static_cast<std::size_t>(q_b)}, {s2.data(), static_cast<std::size_t>(q_b)}, rho,
                          cal.t_r, scene.offsets.to, spec.flags.window_radius, opt)
        .mse;
}

void run_sync_point(const ExperimentSpec& spec, const SweepPoint& p, int trial, TrialRecord& rec) {
    const Scene scene = make_scene(spec, p, trial);
    const Window window = p.window.value_or(spec.flags.window);
    const SyncOutcome sync = synchronize(spec, scene, p.snr_db, window, trial);
    record_sync_errors(rec, "cmcc", sync.cmcc, scene.offsets, spec.ofdm);
    record_sync_errors(rec, "scmcc", sync.scmcc, scene.offsets, spec.ofdm);
    rec.set("k_c", sync.fingerprint.k_c);
    rec.set("true_to_range", scene.offsets.to * kSpeedOfLight);
    rec.set("true_cfo_velocity", scene.offsets.cfo * kSpeedOfLight / (2.0 * spec.ofdm.f_c));
    if (spec.flags.sync_bound) {
        rec.set("bound_range", noise_free_bound(spec, scene, sync, window, trial));
    }
}

// ---- association -------------------------------------------------------------------------------------

class AssociationTrial {
public:
    AssociationTrial(const ExperimentSpec& spec, int trial) : spec_(spec), trial_(trial) {}

    void run(const SweepPoint& p, TrialRecord& rec) {
        const Prepared& prep = prepare(p);
        const Window window = p.window.value_or(spec_.flags.window);
        const DelayDopplerSpectrum& grid = spectrum_for(prep, window);
        const PeakSet peaks = find_peaks(grid, static_cast<int>(prep.truth.size()));
        const AssociationVariant variant = p.association.value_or(spec_.flags.association);
        AssociationResult assoc;
        switch (variant) {
            case AssociationVariant::full:
                assoc = associate_full(prep.mti.breve_y, prep.doas, peaks, grid, spec_.ofdm.d_over_lambda);
                break;
            case AssociationVariant::delay: {
                const int g = select_symbol(prep.mti.breve_y);
                assoc = associate_delay_domain(prep.mti.breve_y[static_cast<std::size_t>(g)], prep.doas, peaks, grid,
                                               spec_.ofdm.d_over_lambda);
                break;
            }
            case AssociationVariant::doppler: {
                const int n = select_subcarrier(prep.mti.breve_y);
                assoc = associate_doppler_domain(column_stack(prep.mti.breve_y, n), prep.doas, peaks, grid,
                                                 spec_.ofdm.d_over_lambda);
                break;
            }
        }
        score(peaks, assoc, grid, prep, rec);
    }

private:
    struct Prepared {
        MtiStack mti;
        DoaEstimate doas;
        std::vector<TargetTrack> truth;
        CMatrix gamma;
        std::map<Window, DelayDopplerSpectrum> grids;
    };

    const Prepared& prepare(const SweepPoint& p) {
        const std::string key = scene_key(p) + fmt::format("|{}", p.snr_db);
        if (key != key_) {
            Scene scene = make_scene(spec_, p, trial_);
            scene.offsets = {};
            Rng rng = noise_rng(spec_, trial_);
            const FrameStack frames = synthesize_frames(spec_.ofdm, scene.paths, scene.offsets, Decibel{p.snr_db},
                                                        default_precoder(spec_.ofdm.m_u), rng);
            prep_ = Prepared{};
            prep_.mti = mti_cancel(compensate(frames), p.g_d.value_or(spec_.flags.g_d));
            prep_.truth = truth_tracks(scene, spec_.ofdm);
            prep_.doas = estimate_doa(prep_.mti.breve_y, static_cast<int>(prep_.truth.size()), kDefaultAngleStep,
                                      spec_.ofdm.d_over_lambda);
            prep_.gamma = stack_antenna_row(prep_.mti.breve_y, select_antenna(prep_.mti.breve_y));
            key_ = key;
        }
        return prep_;
    }

    const DelayDopplerSpectrum& spectrum_for(const Prepared& prep, Window window) {
        auto it = prep_.grids.find(window);
        if (it == prep_.grids.end()) {
            it = prep_.grids
                     .emplace(window, spectrum(prep.gamma, spec_.flags.k_doppler, spec_.flags.k_range, window,
                                               spec_.ofdm))
                     .first;
        }
        return it->second;
    }

    void score(const PeakSet& peaks, const AssociationResult& assoc, const DelayDopplerSpectrum& grid,
               const Prepared& prep, TrialRecord& rec) const {
        const std::vector<RangeVelocity> rv = map_to_physical(peaks, grid, spec_.ofdm);
        const double r_tol = range_unit(spec_.ofdm);
        const double v_tol = velocity_unit(spec_.ofdm, grid.g_eff);
        int matched = 0;
        int correct = 0;
        for (const Association& a : assoc.pairs) {
            const RangeVelocity& e = rv[static_cast<std::size_t>(a.peak)];
            int target = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < prep.truth.size(); ++t) {
                const double dr = std::abs(e.range - prep.truth[t].range);
                const double dv = std::abs(e.velocity - 2.0 * prep.truth[t].velocity);
                if (dr <= r_tol && dv <= v_tol && dr / r_tol + dv / v_tol < best) {
                    best = dr / r_tol + dv / v_tol;
                    target = static_cast<int>(t);
                }
            }
            if (target < 0) {
                continue;
            }
            ++matched;
            const double truth_sin = std::sin(prep.truth[static_cast<std::size_t>(target)].doa);
            const auto nearest = std::min_element(
                prep.doas.angles.begin(), prep.doas.angles.end(), [&](double x, double y) {
                    return std::abs(std::sin(x) - truth_sin) < std::abs(std::sin(y) - truth_sin);
                });
            if (nearest - prep.doas.angles.begin() == a.doa) {
                ++correct;
            }
        }
        rec.set("matched_peaks", matched);
        rec.set("correct_pairs", correct);
        rec.set("success", matched > 0 && correct == matched ? 1.0 : 0.0);
    }

    const ExperimentSpec& spec_;
    int trial_;
    std::string key_;
    Prepared prep_;
};

// ---- full asynchronous sensing chain -----------------------------------------------------------------

void run_sensing_point(const ExperimentSpec& spec, const SweepPoint& p, int trial, TrialRecord& rec) {
    const Scene scene = make_scene(spec, p, trial);
    const Window window = p.window.value_or(spec.flags.window);
    SyncOutcome sync = synchronize(spec, scene, p.snr_db, window, trial);
    record_sync_errors(rec, "cmcc", sync.cmcc, scene.offsets, spec.ofdm);

    const OffsetState estimated{sync.cmcc.d_xi * spec.ofdm.delta_f, sync.cmcc.d_tau};
    remove_offsets(sync.updated, estimated, spec.ofdm);
    const MtiStack mti = mti_cancel(sync.updated, p.g_d.value_or(spec.flags.g_d));
    const int m = select_antenna(mti.breve_y);
    const DelayDopplerSpectrum grid =
        spectrum(stack_antenna_row(mti.breve_y, m), spec.flags.k_doppler, spec.flags.k_range, window, spec.ofdm);
    const auto truth = truth_tracks(scene, spec.ofdm);
    const PeakSet peaks = find_peaks(grid, static_cast<int>(truth.size()));
    record_tracking_errors(rec, to_tracks(map_to_physical(peaks, grid, spec.ofdm)), truth, spec.ofdm, grid.g_eff);
}

}  // namespace

std::uint64_t trial_seed(const ExperimentSpec& spec, int trial) {
    return stream_seed(spec.master_seed, static_cast<std::uint64_t>(trial));
}

std::vector<TrialRecord> run_trial(const ExperimentSpec& spec, const std::vector<SweepPoint>& points, int trial) {
    std::vector<TrialRecord> out;
    out.reserve(points.size());
    SuppressionTrial suppression(spec, trial);
    AssociationTrial association(spec, trial);
    for (const SweepPoint& p : points) {
        TrialRecord rec;
        rec.seed = trial_seed(spec, trial);
        rec.trial = trial;
        rec.point = p.index;
        try {
            switch (spec.kind) {
                case ExperimentKind::suppression: suppression.run(p, rec); break;
                case ExperimentKind::crlb: run_crlb_point(spec, p, trial, rec); break;
                case ExperimentKind::sync: run_sync_point(spec, p, trial, rec); break;
                case ExperimentKind::association: association.run(p, rec); break;
                case ExperimentKind::sensing: run_sensing_point(spec, p, trial, rec); break;
            }
        } catch (const EstimationError&) {
            rec.miss = true;
            if (spec.kind == ExperimentKind::association) {
                rec.set("success", 0.0);
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace pvn
