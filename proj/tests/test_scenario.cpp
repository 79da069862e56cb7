#include "pvn/scene_io.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <sstream>

using namespace pvn;

namespace {

SceneConfig field_scene(std::uint64_t seed) {
    SceneConfig s;
    s.rng_seed = seed;
    return s;
}

}  // namespace

TEST_CASE("stationary target on the baseline has zero Doppler but stays moving") {
    SceneConfig s;
    s.ut = {80.0, 0.0};
    const OfdmConfig ofdm;
    const PathParam p = path_from_geometry(s, ofdm, {40.0, 5.0}, 0.0, false);
    CHECK(p.doppler == 0.0);
    CHECK_FALSE(p.is_static);
}

TEST_CASE("two-hop delay follows the geometry") {
    SceneConfig s;
    s.ut = {80.0, 0.0};
    const OfdmConfig ofdm;
    const PathParam p = path_from_geometry(s, ofdm, {40.0, 30.0}, 10.0, false);
    CHECK(p.delay == doctest::Approx(100.0 / kSpeedOfLight).epsilon(1e-15));
    // Bisector of UT->target and RRU->target directions is vertical; half-angle cosine is 30/50.
    CHECK(bisector_cosine(s, {40.0, 30.0}) == doctest::Approx(0.6));
    CHECK(p.doppler == doctest::Approx(2.0 * 10.0 * 0.6 * ofdm.f_c / kSpeedOfLight));
}

TEST_CASE("field configuration yields 9 to 24 paths") {
    const OfdmConfig ofdm;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const Scene scene = generate_scene(field_scene(seed), ofdm);
        CHECK(scene.paths.size() >= 9);
        CHECK(scene.paths.size() <= 24);
        CHECK(moving_paths(scene.paths).size() == 3);
    }
}

TEST_CASE("offset conversions") {
    const OfdmConfig ofdm;
    CHECK(cfo_from_velocity(15.0, ofdm) == doctest::Approx(2800.0));
    CHECK(to_from_range(75.0) == doctest::Approx(2.5e-7));

    SceneConfig s;
    s.cfo_velocity = {20.0, 20.0};
    s.to_range = {60.0, 60.0};
    Rng rng = make_rng(9);
    for (int i = 0; i < 5; ++i) {
        const OffsetState o = draw_offsets(s, ofdm, rng);
        CHECK(o.cfo == cfo_from_velocity(20.0, ofdm));
        CHECK(o.to == to_from_range(60.0));
    }
}

TEST_CASE("same seed gives a bit-identical scene") {
    const OfdmConfig ofdm;
    const Scene a = generate_scene(field_scene(77), ofdm);
    const Scene b = generate_scene(field_scene(77), ofdm);
    REQUIRE(a.paths.size() == b.paths.size());
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
        CHECK(a.paths[i].gain == b.paths[i].gain);
        CHECK(a.paths[i].delay == b.paths[i].delay);
        CHECK(a.paths[i].doppler == b.paths[i].doppler);
        CHECK(a.paths[i].doa == b.paths[i].doa);
    }
    CHECK(a.offsets.cfo == b.offsets.cfo);
    CHECK(a.offsets.to == b.offsets.to);
}

TEST_CASE("scene invariants hold across seeds") {
    const OfdmConfig ofdm;
    SceneConfig s;
    const double doppler_cap = 2.0 * s.target_speed.hi * ofdm.f_c / kSpeedOfLight;
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        s.rng_seed = seed;
        const Scene scene = generate_scene(s, ofdm);
        for (const PathParam& p : scene.paths) {
            if (p.is_static) {
                CHECK(p.doppler == 0.0);
            } else {
                CHECK(std::abs(p.doppler) <= doppler_cap);
            }
            CHECK(p.delay <= ofdm.max_delay());
        }
        for (std::size_t t = 0; t < scene.targets.size(); ++t) {
            const Point2 pos = scene.targets[t].position;
            const double expected = (distance(pos, s.ut) + distance(pos, s.rru)) / kSpeedOfLight;
            const auto it = std::find_if(scene.paths.begin(), scene.paths.end(), [&](const PathParam& p) {
                return !p.is_static && p.cluster == static_cast<int>(t);
            });
            REQUIRE(it != scene.paths.end());
            CHECK(std::abs(it->delay - expected) <= 1e-12);
        }
    }
}

TEST_CASE("geometry beyond the cyclic prefix is rejected") {
    SceneConfig s;
    OfdmConfig ofdm;
    ofdm.n_cp = 1;
    CHECK_THROWS_AS(path_from_geometry(s, ofdm, {40.0, 30.0}, 0.0, true), ConfigError);
    s.target_range = {30.0, 20.0};
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("velocity gap and static count overrides") {
    const OfdmConfig ofdm;
    SceneConfig s;
    s.min_velocity_gap = 4.0;
    s.total_statics = 7;
    s.rng_seed = 3;
    const Scene scene = generate_scene(s, ofdm);
    CHECK(static_paths(scene.paths).size() == 7);
    for (std::size_t i = 0; i < scene.targets.size(); ++i) {
        for (std::size_t j = i + 1; j < scene.targets.size(); ++j) {
            CHECK(std::abs(scene.targets[i].projected_speed - scene.targets[j].projected_speed) >= 4.0);
        }
    }
}

TEST_CASE("direct path carries the requested power share") {
    const OfdmConfig ofdm;
    SceneConfig s;
    s.los_ratio = 10.0;
    const Scene scene = generate_scene(s, ofdm);
    double others = 0.0;
    for (std::size_t i = 0; i + 1 < scene.paths.size(); ++i) {
        others += std::norm(scene.paths[i].gain);
    }
    const PathParam& los = scene.paths.back();
    CHECK(los.is_static);
    CHECK(los.doa == 0.0);
    CHECK(std::norm(los.gain) == doctest::Approx(10.0 * others));
    CHECK(los.delay == doctest::Approx(80.0 / kSpeedOfLight));
}

TEST_CASE("scene text round trip is lossless") {
    const Scene a = generate_scene(field_scene(5), OfdmConfig{});
    std::stringstream ss;
    write_scene(ss, a);
    const Scene b = read_scene(ss);
    REQUIRE(b.paths.size() == a.paths.size());
    CHECK(b.offsets.cfo == a.offsets.cfo);
    CHECK(b.offsets.to == a.offsets.to);
    for (std::size_t i = 0; i < a.paths.size(); ++i) {
        CHECK(b.paths[i].gain == a.paths[i].gain);
        CHECK(b.paths[i].doa == a.paths[i].doa);
        CHECK(b.paths[i].aod == a.paths[i].aod);
        CHECK(b.paths[i].delay == a.paths[i].delay);
        CHECK(b.paths[i].doppler == a.paths[i].doppler);
        CHECK(b.paths[i].is_static == a.paths[i].is_static);
    }
}
