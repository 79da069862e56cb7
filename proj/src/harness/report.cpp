#include "pvn/harness.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <algorithm>
#include <fstream>

namespace pvn {
namespace {

std::vector<std::string> union_keys(const auto& rows, auto get_fields) {
    std::vector<std::string> keys;
    for (const auto& r : rows) {
        for (const auto& [k, v] : get_fields(r)) {
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
                keys.push_back(k);
            }
        }
    }
    return keys;
}

std::string cell(const std::vector<std::pair<std::string, double>>& fields, const std::string& key) {
    for (const auto& [k, v] : fields) {
        if (k == key) {
            return fmt::format("{:.17g}", v);
        }
    }
    return "";
}

std::string label_header(const std::vector<SweepPoint>& points) {
    std::string out;
    if (!points.empty()) {
        for (const auto& [k, v] : points.front().labels()) {
            out += "," + k;
        }
    }
    return out;
}

std::string label_cells(const SweepPoint& p) {
    std::string out;
    for (const auto& [k, v] : p.labels()) {
        out += "," + v;
    }
    return out;
}

std::string plot_script(const ExperimentSpec& spec) {
    std::string body;
    switch (spec.kind) {
        case ExperimentKind::suppression:
            body = R"py(cols = [c for c in df.columns if c.startswith("ratio_db_") and c != "ratio_db_mean"]
counts = [int(c.split("_")[-1]) for c in cols]
fig, ax = plt.subplots()
for (cfo, canc), grp in df.groupby(["cfo_velocity", "canceller"]):
    ax.plot(counts, grp[cols].iloc[0].values, label=f"{canc} cfo={cfo} m/s")
ax.set_xlabel("symbols")
ax.set_ylabel("suppression ratio (dB)")
)py";
            break;
        case ExperimentKind::crlb:
            body = R"py(fig, ax = plt.subplots()
for gd, grp in df.groupby("g_d"):
    ax.semilogy(grp["snr_db"], grp["sq_err_range"], "o-", label=f"MSE G_d={gd}")
    if "crlb_range" in grp:
        ax.semilogy(grp["snr_db"], grp["crlb_range"], "--", label=f"CRLB G_d={gd}")
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("range MSE (m^2)")
)py";
            break;
        case ExperimentKind::sync:
            body = R"py(fig, ax = plt.subplots()
for n, grp in df.groupby("clutter_paths"):
    ax.semilogy(grp["snr_db"], grp["sq_err_range_cmcc"], "o-", label=f"CMCC {n} paths")
    ax.semilogy(grp["snr_db"], grp["sq_err_range_scmcc"], "s--", label=f"S-CMCC {n} paths")
    if "bound_range" in grp:
        ax.semilogy(grp["snr_db"], grp["bound_range"], "k:", label=f"bound {n} paths")
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("range MSE (m^2)")
)py";
            break;
        case ExperimentKind::association:
            body = R"py(fig, ax = plt.subplots()
for (win, var), grp in df.groupby(["window", "association"]):
    ax.plot(grp["velocity_gap"], grp["success"], "o-", label=f"{var} {win}")
ax.set_xlabel("minimum velocity gap (m/s)")
ax.set_ylabel("association success")
)py";
            break;
        case ExperimentKind::sensing:
            body = R"py(fig, ax = plt.subplots()
for los, grp in df.groupby("los_ratio"):
    ax.semilogy(grp["snr_db"], grp["sq_err_velocity"], "o-", label=f"LOS ratio {los}")
ax.set_xlabel("SNR (dB)")
ax.set_ylabel("velocity MSE (m^2/s^2)")
)py";
            break;
    }
    return fmt::format(R"py(#!/usr/bin/env python3
import pathlib
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

here = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).parent)
df = pd.read_csv(here / "summary.csv")
{}ax.legend()
ax.set_title("{}")
fig.savefig(here / "{}.png", dpi=150)
)py",
                       body, spec.name, spec.name);
}

void write_text(const std::filesystem::path& file, const std::string& text) {
    std::ofstream os(file, std::ios::binary);
    if (!os) {
        throw std::runtime_error("cannot write " + file.string());
    }
    os << text;
}

}  // namespace

std::string records_csv(const std::vector<SweepPoint>& points, const std::vector<TrialRecord>& records) {
    const auto keys = union_keys(records, [](const TrialRecord& r) { return r.fields; });
    std::string out = "seed,trial,point" + label_header(points) + ",miss";
    for (const auto& k : keys) {
        out += "," + k;
    }
    out += "\n";
    for (const TrialRecord& r : records) {
        out += fmt::format("{},{},{}", r.seed, r.trial, r.point) + label_cells(points[static_cast<std::size_t>(r.point)]) +
               fmt::format(",{}", r.miss ? 1 : 0);
        for (const auto& k : keys) {
            out += "," + cell(r.fields, k);
        }
        out += "\n";
    }
    return out;
}

std::string summary_csv(const std::vector<SweepPoint>& points, const std::vector<SummaryRow>& rows) {
    const auto keys = union_keys(rows, [](const SummaryRow& r) { return r.mean; });
    std::string out = "point" + label_header(points) + ",n_records,n_miss";
    for (const auto& k : keys) {
        out += "," + k;
    }
    for (const auto& k : keys) {
        out += "," + k + "_se";
    }
    out += "\n";
    for (const SummaryRow& r : rows) {
        out += std::to_string(r.point) + label_cells(points[static_cast<std::size_t>(r.point)]) +
               fmt::format(",{},{}", r.n_records, r.n_miss);
        for (const auto& k : keys) {
            out += "," + cell(r.mean, k);
        }
        for (const auto& k : keys) {
            out += "," + cell(r.std_error, k);
        }
        out += "\n";
    }
    return out;
}

void write_outputs(const ExperimentSpec& spec, const ExperimentResult& result) {
    std::filesystem::create_directories(spec.output_dir);
    write_text(spec.output_dir / "results.csv", records_csv(result.points, result.records));
    write_text(spec.output_dir / "summary.csv", summary_csv(result.points, result.summary));
    write_text(spec.output_dir / "config.txt", render_config(spec));
    write_text(spec.output_dir / fmt::format("plot_{}.py", spec.name), plot_script(spec));
}

}  // namespace pvn
