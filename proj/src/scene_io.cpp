#include "pvn/scene_io.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>
#include <string>

namespace pvn {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

PathParam parse_path(const std::string& value) {
    std::istringstream is(value);
    std::string field;
    std::vector<double> v;
    while (std::getline(is, field, ',')) {
        v.push_back(std::stod(trim(field)));
    }
    if (v.size() != 7) {
        throw ConfigError("path line needs 7 fields: " + value);
    }
    PathParam p;
    p.gain = cd(v[0], v[1]);
    p.doa = v[2];
    p.aod = v[3];
    p.delay = v[4];
    p.doppler = v[5];
    p.is_static = v[6] != 0.0;
    return p;
}

}  // namespace

void write_scene(std::ostream& os, const Scene& scene) {
    os << fmt::format("cfo = {:.17g}\nto = {:.17g}\n", scene.offsets.cfo, scene.offsets.to);
    for (const PathParam& p : scene.paths) {
        os << fmt::format("path = {:.17g}, {:.17g}, {:.17g}, {:.17g}, {:.17g}, {:.17g}, {:d}\n", p.gain.real(),
                          p.gain.imag(), p.doa, p.aod, p.delay, p.doppler, p.is_static ? 1 : 0);
    }
}

Scene read_scene(std::istream& is) {
    Scene scene;
    std::string line;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value: " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "cfo") {
            scene.offsets.cfo = std::stod(value);
        } else if (key == "to") {
            scene.offsets.to = std::stod(value);
        } else if (key == "path") {
            scene.paths.push_back(parse_path(value));
        } else {
            throw ConfigError("unknown scene key: " + key);
        }
    }
    return scene;
}

void save_scene(const std::filesystem::path& file, const Scene& scene) {
    std::ofstream os(file);
    if (!os) {
        throw std::runtime_error("cannot open " + file.string());
    }
    write_scene(os, scene);
}

Scene load_scene(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) {
        throw std::runtime_error("cannot open " + file.string());
    }
    return read_scene(is);
}

}  // namespace pvn
