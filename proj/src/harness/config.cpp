#include "pvn/harness.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <fstream>
#include <sstream>

namespace pvn {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

double to_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw ConfigError("trailing characters in number: " + s);
        }
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("not a number: " + s);
    }
}

int to_int(const std::string& s) {
    const double v = to_double(s);
    if (v != static_cast<double>(static_cast<int>(v))) {
        throw ConfigError("not an integer: " + s);
    }
    return static_cast<int>(v);
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "1") {
        return true;
    }
    if (s == "false" || s == "0") {
        return false;
    }
    throw ConfigError("not a boolean: " + s);
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

template <typename T, typename F>
std::vector<T> parse_list(const std::string& s, F convert) {
    std::vector<T> out;
    for (const std::string& item : split(s)) {
        out.push_back(convert(item));
    }
    return out;
}

template <typename T, typename F>
std::string render_list(const std::vector<T>& v, F convert) {
    std::vector<std::string> parts;
    for (const T& x : v) {
        parts.push_back(std::string(convert(x)));
    }
    return fmt::format("{}", fmt::join(parts, ", "));
}

Interval to_interval(const std::string& s) {
    const auto v = parse_list<double>(s, to_double);
    if (v.size() != 2) {
        throw ConfigError("interval needs two values: " + s);
    }
    return {v[0], v[1]};
}

IntInterval to_int_interval(const std::string& s) {
    const auto v = parse_list<int>(s, to_int);
    if (v.size() != 2) {
        throw ConfigError("interval needs two values: " + s);
    }
    return {v[0], v[1]};
}

Point2 to_point(const std::string& s) {
    const Interval iv = to_interval(s);
    return {iv.lo, iv.hi};
}

ExperimentKind parse_kind(const std::string& s) {
    for (ExperimentKind k : {ExperimentKind::suppression, ExperimentKind::crlb, ExperimentKind::sync,
                             ExperimentKind::association, ExperimentKind::sensing}) {
        if (kind_name(k) == s) {
            return k;
        }
    }
    throw ConfigError("unknown experiment kind: " + s);
}

Canceller parse_canceller(const std::string& s) {
    if (s == "mti") {
        return Canceller::mti;
    }
    if (s == "rma") {
        return Canceller::rma;
    }
    throw ConfigError("unknown canceller: " + s);
}

AssociationVariant parse_association(const std::string& s) {
    for (AssociationVariant a : {AssociationVariant::full, AssociationVariant::delay, AssociationVariant::doppler}) {
        if (association_name(a) == s) {
            return a;
        }
    }
    throw ConfigError("unknown association variant: " + s);
}

struct Field {
    std::string key;
    std::function<void(ExperimentSpec&, const std::string&)> set;
    std::function<std::string(const ExperimentSpec&)> get;
};

#define PVN_NUM(key, member)                                                                       \
    Field {                                                                                        \
        key, [](ExperimentSpec& s, const std::string& v) { s.member = to_double(v); },             \
            [](const ExperimentSpec& s) { return num(s.member); }                                  \
    }
#define PVN_INT(key, member)                                                                       \
    Field {                                                                                        \
        key, [](ExperimentSpec& s, const std::string& v) { s.member = to_int(v); },                \
            [](const ExperimentSpec& s) { return std::to_string(s.member); }                       \
    }
#define PVN_INTERVAL(key, member)                                                                  \
    Field {                                                                                        \
        key, [](ExperimentSpec& s, const std::string& v) { s.member = to_interval(v); },           \
            [](const ExperimentSpec& s) { return num(s.member.lo) + ", " + num(s.member.hi); }     \
    }
#define PVN_POINT(key, member)                                                                     \
    Field {                                                                                        \
        key, [](ExperimentSpec& s, const std::string& v) { s.member = to_point(v); },              \
            [](const ExperimentSpec& s) { return num(s.member.x) + ", " + num(s.member.y); }       \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        {"name", [](ExperimentSpec& s, const std::string& v) { s.name = v; },
         [](const ExperimentSpec& s) { return s.name; }},
        {"kind", [](ExperimentSpec& s, const std::string& v) { s.kind = parse_kind(v); },
         [](const ExperimentSpec& s) { return std::string(kind_name(s.kind)); }},
        PVN_INT("trials", n_trials),
        {"seed", [](ExperimentSpec& s, const std::string& v) { s.master_seed = std::stoull(v); },
         [](const ExperimentSpec& s) { return std::to_string(s.master_seed); }},
        {"snr", [](ExperimentSpec& s, const std::string& v) { s.snr_sweep = parse_list<double>(v, to_double); },
         [](const ExperimentSpec& s) { return render_list(s.snr_sweep, num); }},
        {"output_dir", [](ExperimentSpec& s, const std::string& v) { s.output_dir = v; },
         [](const ExperimentSpec& s) { return s.output_dir.string(); }},

        PVN_POINT("scene.rru", scene.rru),
        PVN_POINT("scene.ut", scene.ut),
        PVN_INT("scene.n_targets", scene.n_targets),
        PVN_INTERVAL("scene.target_speed", scene.target_speed),
        PVN_INTERVAL("scene.target_range", scene.target_range),
        PVN_INTERVAL("scene.target_doa", scene.target_doa),
        {"scene.statics_per_target",
         [](ExperimentSpec& s, const std::string& v) { s.scene.statics_per_target = to_int_interval(v); },
         [](const ExperimentSpec& s) {
             return fmt::format("{}, {}", s.scene.statics_per_target.lo, s.scene.statics_per_target.hi);
         }},
        PVN_NUM("scene.static_scatter_radius", scene.static_scatter_radius),
        PVN_NUM("scene.rcs", scene.rcs),
        PVN_NUM("scene.tx_power_dbm", scene.tx_power_dbm),
        PVN_INTERVAL("scene.cfo_velocity", scene.cfo_velocity),
        PVN_INTERVAL("scene.to_range", scene.to_range),
        PVN_NUM("scene.min_velocity_gap", scene.min_velocity_gap),
        {"scene.total_statics",
         [](ExperimentSpec& s, const std::string& v) {
             s.scene.total_statics = v == "none" ? std::nullopt : std::optional<int>(to_int(v));
         },
         [](const ExperimentSpec& s) {
             return s.scene.total_statics ? std::to_string(*s.scene.total_statics) : std::string("none");
         }},
        {"scene.los_ratio",
         [](ExperimentSpec& s, const std::string& v) {
             s.scene.los_ratio = v == "none" ? std::nullopt : std::optional<double>(to_double(v));
         },
         [](const ExperimentSpec& s) { return s.scene.los_ratio ? num(*s.scene.los_ratio) : std::string("none"); }},

        PVN_NUM("ofdm.f_c", ofdm.f_c),
        PVN_NUM("ofdm.delta_f", ofdm.delta_f),
        PVN_INT("ofdm.n_sub", ofdm.n_sub),
        PVN_INT("ofdm.n_cp", ofdm.n_cp),
        PVN_INT("ofdm.g_symbols", ofdm.g_symbols),
        PVN_INT("ofdm.m_r", ofdm.m_r),
        PVN_INT("ofdm.m_u", ofdm.m_u),
        PVN_NUM("ofdm.d_over_lambda", ofdm.d_over_lambda),

        PVN_INT("flags.g_d", flags.g_d),
        PVN_NUM("flags.rma_forgetting", flags.rma_forgetting),
        {"flags.window", [](ExperimentSpec& s, const std::string& v) { s.flags.window = parse_window(v); },
         [](const ExperimentSpec& s) { return std::string(window_name(s.flags.window)); }},
        {"flags.association",
         [](ExperimentSpec& s, const std::string& v) { s.flags.association = parse_association(v); },
         [](const ExperimentSpec& s) { return std::string(association_name(s.flags.association)); }},
        PVN_INT("flags.k_doppler", flags.k_doppler),
        PVN_INT("flags.k_range", flags.k_range),
        PVN_INT("flags.window_radius", flags.window_radius),
        {"flags.sync_bound", [](ExperimentSpec& s, const std::string& v) { s.flags.sync_bound = to_bool(v); },
         [](const ExperimentSpec& s) { return std::string(s.flags.sync_bound ? "true" : "false"); }},
        PVN_INT("flags.bound_points", flags.bound_points),
        PVN_INT("flags.symbol_stride", flags.symbol_stride),

        {"sweep.cfo_velocity",
         [](ExperimentSpec& s, const std::string& v) { s.axes.cfo_velocity = parse_list<double>(v, to_double); },
         [](const ExperimentSpec& s) { return render_list(s.axes.cfo_velocity, num); }},
        {"sweep.canceller",
         [](ExperimentSpec& s, const std::string& v) { s.axes.canceller = parse_list<Canceller>(v, parse_canceller); },
         [](const ExperimentSpec& s) { return render_list(s.axes.canceller, canceller_name); }},
        {"sweep.g_d", [](ExperimentSpec& s, const std::string& v) { s.axes.g_d = parse_list<int>(v, to_int); },
         [](const ExperimentSpec& s) { return render_list(s.axes.g_d, [](int x) { return std::to_string(x); }); }},
        {"sweep.clutter_paths",
         [](ExperimentSpec& s, const std::string& v) { s.axes.clutter_paths = parse_list<int>(v, to_int); },
         [](const ExperimentSpec& s) {
             return render_list(s.axes.clutter_paths, [](int x) { return std::to_string(x); });
         }},
        {"sweep.velocity_gap",
         [](ExperimentSpec& s, const std::string& v) { s.axes.velocity_gap = parse_list<double>(v, to_double); },
         [](const ExperimentSpec& s) { return render_list(s.axes.velocity_gap, num); }},
        {"sweep.window",
         [](ExperimentSpec& s, const std::string& v) {
             s.axes.window = parse_list<Window>(v, [](const std::string& x) { return parse_window(x); });
         },
         [](const ExperimentSpec& s) { return render_list(s.axes.window, window_name); }},
        {"sweep.association",
         [](ExperimentSpec& s, const std::string& v) {
             s.axes.association = parse_list<AssociationVariant>(v, parse_association);
         },
         [](const ExperimentSpec& s) { return render_list(s.axes.association, association_name); }},
        {"sweep.los_ratio",
         [](ExperimentSpec& s, const std::string& v) { s.axes.los_ratio = parse_list<double>(v, to_double); },
         [](const ExperimentSpec& s) { return render_list(s.axes.los_ratio, num); }},
    };
    return table;
}

#undef PVN_NUM
#undef PVN_INT
#undef PVN_INTERVAL
#undef PVN_POINT

}  // namespace

std::string_view kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::suppression: return "suppression";
        case ExperimentKind::crlb: return "crlb";
        case ExperimentKind::sync: return "sync";
        case ExperimentKind::association: return "association";
        case ExperimentKind::sensing: return "sensing";
    }
    return "sensing";
}

std::string_view canceller_name(Canceller c) { return c == Canceller::rma ? "rma" : "mti"; }

std::string_view association_name(AssociationVariant a) {
    switch (a) {
        case AssociationVariant::full: return "full";
        case AssociationVariant::delay: return "delay";
        case AssociationVariant::doppler: return "doppler";
    }
    return "full";
}

void apply_config_text(ExperimentSpec& spec, const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("line {}: expected key = value", line_no));
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end()) {
            throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
        }
        it->set(spec, value);
    }
}

void apply_config_file(ExperimentSpec& spec, const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) {
        throw ConfigError("cannot read config " + file.string());
    }
    std::stringstream buf;
    buf << is.rdbuf();
    apply_config_text(spec, buf.str());
}

std::string render_config(const ExperimentSpec& spec) {
    std::string out;
    for (const Field& f : fields()) {
        out += f.key + " = " + f.get(spec) + "\n";
    }
    return out;
}

void ExperimentSpec::validate() const {
    if (n_trials < 1) {
        throw ConfigError("need at least one trial");
    }
    if (snr_sweep.empty()) {
        throw ConfigError("SNR sweep is empty");
    }
    scene.validate();
    ofdm.validate();
    if (flags.k_doppler < 1 || flags.k_range < 1) {
        throw ConfigError("padding factors must be at least 1");
    }
    if (flags.g_d < 0 || flags.g_d >= ofdm.g_symbols) {
        throw ConfigError("canceller lag must lie in [0, G)");
    }
    for (int g : axes.g_d) {
        if (g < 0 || g >= ofdm.g_symbols) {
            throw ConfigError("swept canceller lag must lie in [0, G)");
        }
    }
    if (!(flags.rma_forgetting > 0.0 && flags.rma_forgetting <= 1.0)) {
        throw ConfigError("forgetting factor must lie in (0, 1]");
    }
    if (flags.window_radius < 1 || flags.bound_points < 8 || flags.symbol_stride < 1) {
        throw ConfigError("bound window, point count and symbol stride must be positive");
    }
}

std::vector<std::pair<std::string, std::string>> SweepPoint::labels() const {
    std::vector<std::pair<std::string, std::string>> out{{"snr_db", num(snr_db)}};
    if (cfo_velocity) {
        out.emplace_back("cfo_velocity", num(*cfo_velocity));
    }
    if (canceller) {
        out.emplace_back("canceller", std::string(canceller_name(*canceller)));
    }
    if (g_d) {
        out.emplace_back("g_d", std::to_string(*g_d));
    }
    if (clutter_paths) {
        out.emplace_back("clutter_paths", std::to_string(*clutter_paths));
    }
    if (velocity_gap) {
        out.emplace_back("velocity_gap", num(*velocity_gap));
    }
    if (window) {
        out.emplace_back("window", std::string(window_name(*window)));
    }
    if (association) {
        out.emplace_back("association", std::string(association_name(*association)));
    }
    if (los_ratio) {
        out.emplace_back("los_ratio", num(*los_ratio));
    }
    return out;
}

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec) {
    std::vector<SweepPoint> points{SweepPoint{}};
    const auto expand = [&points](const auto& axis, auto assign) {
        if (axis.empty()) {
            return;
        }
        std::vector<SweepPoint> next;
        for (const SweepPoint& p : points) {
            for (const auto& value : axis) {
                SweepPoint q = p;
                assign(q, value);
                next.push_back(q);
            }
        }
        points = std::move(next);
    };
    // Scene-shaping axes first so that neighbouring points share scenes.
    expand(spec.axes.clutter_paths, [](SweepPoint& p, int v) { p.clutter_paths = v; });
    expand(spec.axes.velocity_gap, [](SweepPoint& p, double v) { p.velocity_gap = v; });
    expand(spec.axes.los_ratio, [](SweepPoint& p, double v) { p.los_ratio = v; });
    expand(spec.axes.cfo_velocity, [](SweepPoint& p, double v) { p.cfo_velocity = v; });
    expand(spec.axes.g_d, [](SweepPoint& p, int v) { p.g_d = v; });
    expand(spec.axes.canceller, [](SweepPoint& p, Canceller v) { p.canceller = v; });
    expand(spec.snr_sweep, [](SweepPoint& p, double v) { p.snr_db = v; });
    expand(spec.axes.window, [](SweepPoint& p, Window v) { p.window = v; });
    expand(spec.axes.association, [](SweepPoint& p, AssociationVariant v) { p.association = v; });
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i].index = static_cast<int>(i);
    }
    return points;
}

void TrialRecord::set(const std::string& key, double value) {
    for (auto& [k, v] : fields) {
        if (k == key) {
            v = value;
            return;
        }
    }
    fields.emplace_back(key, value);
}

std::optional<double> TrialRecord::get(const std::string& key) const {
    for (const auto& [k, v] : fields) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

}  // namespace pvn
