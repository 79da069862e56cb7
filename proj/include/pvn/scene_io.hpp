#pragma once

#include "pvn/scenario.hpp"

#include <filesystem>
#include <iosfwd>

namespace pvn {

/// Key-value text form: "cfo = x", "to = x", then one "path = gain_re, gain_im, doa, aod, delay, doppler,
/// is_static" line per path. Lossless for doubles.
void write_scene(std::ostream& os, const Scene& scene);
Scene read_scene(std::istream& is);

void save_scene(const std::filesystem::path& file, const Scene& scene);
Scene load_scene(const std::filesystem::path& file);

}  // namespace pvn
