#include "doctest.h"

#include <cmath>
#include <set>

#include "lvsim/workload.hpp"

using namespace lvsim;

TEST_CASE("region catalog") {
    auto cat = default_region_catalog();
    CHECK(cat.size() == 10);
    std::set<std::string> names;
    for (const auto& r : cat.regions) {
        CHECK(r.index == static_cast<int>(names.size()));
        names.insert(r.name);
        CHECK(r.lat >= -90.0);
        CHECK(r.lat <= 90.0);
        CHECK(r.lon >= -180.0);
        CHECK(r.lon <= 180.0);
    }
    CHECK(names.size() == 10);  // unique names
    CHECK(cat.index_of("virginia") == 1);
    CHECK(cat.index_of("mumbai") == 9);
    CHECK_THROWS_AS(cat.index_of("atlantis"), ValidationError);
}

TEST_CASE("great-circle distance") {
    CHECK(haversine_km(10.0, 20.0, 10.0, 20.0) == doctest::Approx(0.0));
    const double ab = haversine_km(37.35, -121.96, 38.95, -77.45);
    CHECK(ab == doctest::Approx(haversine_km(38.95, -77.45, 37.35, -121.96)));
    // California to Virginia is roughly 3900 km.
    CHECK(ab > 3500.0);
    CHECK(ab < 4200.0);
    // Quarter of the globe along a meridian.
    CHECK(haversine_km(0.0, 0.0, 90.0, 0.0) == doctest::Approx(10007.5).epsilon(0.01));
}

TEST_CASE("default delay table") {
    auto cat = default_region_catalog();
    auto rtt = default_rtt_matrix(cat);
    REQUIRE(rtt.regions() == 10);
    CHECK(rtt.validate().empty());
    CHECK(rtt.local_floor() == doctest::Approx(8.8));
    for (int i = 0; i < 10; ++i) {
        CHECK(rtt.at(i, i) == doctest::Approx(8.8));
        for (int j = 0; j < 10; ++j) {
            CHECK(rtt.at(i, j) == doctest::Approx(rtt.at(j, i)));
            CHECK(rtt.at(i, j) >= 8.8);
        }
    }
    // Spot values: overhead 5 ms plus 0.0137 ms/km, rounded to 0.1 ms.
    const int vir = cat.index_of("virginia");
    const int ohio = cat.index_of("ohio");
    CHECK(rtt.at(vir, ohio) == doctest::Approx(11.7));
    const int cal = cat.index_of("california");
    const int sing = cat.index_of("singapore");
    CHECK(rtt.at(cal, sing) == doctest::Approx(191.9));
}

TEST_CASE("default price book") {
    auto prices = default_price_book();
    REQUIRE(prices.regions() == 10);
    CHECK(prices.validate().empty());
    for (int r = 0; r < 10; ++r)
        CHECK(prices.mu[static_cast<std::size_t>(r)] ==
              doctest::Approx(0.25 * prices.zeta[static_cast<std::size_t>(r)]));
}

TEST_CASE("coordinates map to the nearest region") {
    auto cat = default_region_catalog();
    for (const auto& r : cat.regions)
        CHECK(map_to_region(r.lat, r.lon, cat) == r.index);
    // Antipode-ish fairness: ties go to the lowest index. Equidistance is hard
    // to hit with real coordinates, so check a constructed catalog instead.
    RegionCatalog twin;
    twin.regions = {{0, "east", 0.0, 10.0}, {1, "west", 0.0, -10.0}};
    CHECK(map_to_region(0.0, 0.0, twin) == 0);
}

TEST_CASE("bitrate classification picks the nearest rung, ties upward") {
    CHECK(classify_height(240) == Quality::q240);
    CHECK(classify_height(720) == Quality::q720);
    CHECK(classify_height(2160) == Quality::q720);
    CHECK(classify_height(299) == Quality::q240);
    CHECK(classify_height(300) == Quality::q360);  // tie between 240 and 360
    CHECK(classify_height(421) == Quality::q480);
    CHECK(classify_height(200) == Quality::q240);
    CHECK(classify_bitrate(1280, 720) == Quality::q720);
    CHECK(classify_bitrate(1920, 1080) == Quality::q720);
    CHECK(classify_bitrate(640, 300) == Quality::q360);
    CHECK(classify_bitrate(640, 360) == Quality::q360);
    CHECK_THROWS_AS(classify_height(0), ValidationError);
    CHECK_THROWS_AS(classify_bitrate(0, 480), ValidationError);
    CHECK_THROWS_AS(classify_bitrate(640, -1), ValidationError);
}

TEST_CASE("power-law masses") {
    auto one = zipf_masses(1, 0.9);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == doctest::Approx(1.0));

    auto m = zipf_masses(4, 1.0);
    REQUIRE(m.size() == 4);
    double sum = 0.0;
    for (double v : m) sum += v;
    CHECK(sum == doctest::Approx(1.0));
    // 1 : 1/2 : 1/3 : 1/4 over their total 25/12.
    CHECK(m[0] == doctest::Approx(12.0 / 25.0));
    CHECK(m[3] == doctest::Approx(3.0 / 25.0));
    CHECK(std::is_sorted(m.rbegin(), m.rend()));

    CHECK_THROWS_AS(zipf_masses(0, 0.9), ValidationError);
}

TEST_CASE("generated workload structure") {
    auto cat = default_region_catalog();
    WorkloadConfig cfg;
    cfg.horizon_hours = 30;
    cfg.seed = 7;
    auto wl = generate_workload(cfg, cat);
    REQUIRE(wl.size() == 30);
    for (int t = 0; t < 30; ++t) {
        const auto& slot = wl[static_cast<std::size_t>(t)];
        CHECK(slot.slot == t);
        // Arrivals follow the hour-of-day profile.
        CHECK(static_cast<int>(slot.videos.size()) ==
              cfg.videos_per_hour[static_cast<std::size_t>(t % 24)]);
        REQUIRE(slot.videos.size() == slot.demands.size());
        for (std::size_t v = 0; v < slot.videos.size(); ++v) {
            const auto& video = slot.videos[v];
            CHECK(video.slot == t);
            CHECK(video.broadcast_region >= 0);
            CHECK(video.broadcast_region < cat.size());
            // No demand may exceed the broadcast quality.
            CHECK(slot.demands[v].validate_against(video).empty());
        }
    }
    // Video ids are unique across the whole horizon.
    std::set<std::string> ids;
    for (const auto& slot : wl)
        for (const auto& v : slot.videos) ids.insert(v.video_id);
    std::size_t total = 0;
    for (const auto& slot : wl) total += slot.videos.size();
    CHECK(ids.size() == total);
}

TEST_CASE("generation is deterministic and seed-sensitive") {
    auto cat = default_region_catalog();
    WorkloadConfig cfg;
    cfg.horizon_hours = 12;
    cfg.seed = 42;
    auto a = generate_workload(cfg, cat);
    auto b = generate_workload(cfg, cat);
    CHECK(a == b);

    WorkloadConfig other = cfg;
    other.seed = 43;
    CHECK_FALSE(generate_workload(other, cat) == a);
}

TEST_CASE("viewer counts follow the configured power law") {
    auto cat = default_region_catalog();
    WorkloadConfig cfg;
    cfg.horizon_hours = 1;
    cfg.videos_per_hour.fill(100);
    cfg.viewers_per_video = 1000.0;
    cfg.zipf_exponent = 1.0;
    cfg.seed = 11;
    auto wl = generate_workload(cfg, cat);
    REQUIRE(wl.size() == 1);
    REQUIRE(wl[0].videos.size() == 100);

    std::vector<Viewers> viewers;
    Viewers total = 0;
    for (const auto& d : wl[0].demands) {
        viewers.push_back(d.total_viewers());
        total += d.total_viewers();
    }
    // The pool is arrivals * mean viewers, apportioned by rank mass; rounding
    // keeps each total within one viewer of its ideal share.
    const double pool = 100 * 1000.0;
    auto masses = zipf_masses(100, 1.0);
    for (std::size_t k = 0; k < viewers.size(); ++k)
        CHECK(std::abs(static_cast<double>(viewers[k]) - pool * masses[k]) <= 1.0);
    // Top rank holds roughly 1/H_100 of everything.
    const double top_share = static_cast<double>(viewers[0]) / static_cast<double>(total);
    CHECK(top_share > 0.17);
    CHECK(top_share < 0.22);
}

TEST_CASE("a 240p-only channel never sees higher requests") {
    auto cat = default_region_catalog();
    WorkloadConfig cfg;
    cfg.horizon_hours = 2;
    cfg.broadcast_quality_weights = {1.0, 0.0, 0.0, 0.0};
    cfg.seed = 3;
    auto wl = generate_workload(cfg, cat);
    for (const auto& slot : wl)
        for (std::size_t v = 0; v < slot.videos.size(); ++v) {
            CHECK(slot.videos[v].original_quality == Quality::q240);
            for (const auto& e : slot.demands[v].entries())
                CHECK(e.quality == Quality::q240);
        }
}

TEST_CASE("regional weight overrides") {
    auto cat = default_region_catalog();
    WorkloadConfig cfg;
    cfg.horizon_hours = 2;
    cfg.seed = 9;
    cfg.broadcast_region_weights.assign(10, 0.0);
    cfg.broadcast_region_weights[3] = 1.0;
    auto wl = generate_workload(cfg, cat);
    for (const auto& slot : wl)
        for (const auto& v : slot.videos) CHECK(v.broadcast_region == 3);

    WorkloadConfig bad = cfg;
    bad.broadcast_region_weights.assign(4, 0.25);  // wrong length
    CHECK_THROWS_AS(generate_workload(bad, cat), ValidationError);
    WorkloadConfig neg = cfg;
    neg.broadcast_region_weights.assign(10, 0.1);
    neg.broadcast_region_weights[0] = -0.1;
    CHECK_THROWS_AS(generate_workload(neg, cat), ValidationError);
}

TEST_CASE("per-region viewer quality mixes") {
    auto cat = default_region_catalog();
    WorkloadConfig cfg;
    cfg.horizon_hours = 2;
    cfg.seed = 21;
    cfg.broadcast_quality_weights = {0.0, 0.0, 0.0, 1.0};  // all 720p channels
    cfg.viewer_quality_mix_by_region.assign(10, {0.0, 0.0, 0.0, 1.0});
    cfg.viewer_quality_mix_by_region[2] = {1.0, 0.0, 0.0, 0.0};
    auto wl = generate_workload(cfg, cat);
    bool saw_region2 = false, saw_other = false;
    for (const auto& slot : wl)
        for (const auto& d : slot.demands)
            for (const auto& e : d.entries()) {
                if (e.region == 2) {
                    CHECK(e.quality == Quality::q240);
                    saw_region2 = true;
                } else {
                    CHECK(e.quality == Quality::q720);
                    saw_other = true;
                }
            }
    CHECK(saw_region2);
    CHECK(saw_other);

    WorkloadConfig bad = cfg;
    bad.viewer_quality_mix_by_region.resize(4);
    CHECK_THROWS_AS(generate_workload(bad, cat), ValidationError);
}

TEST_CASE("degenerate knobs are rejected") {
    auto cat = default_region_catalog();
    WorkloadConfig cfg;
    cfg.horizon_hours = 0;
    CHECK_THROWS_AS(generate_workload(cfg, cat), ValidationError);
    WorkloadConfig neg;
    neg.viewers_per_video = -1.0;
    CHECK_THROWS_AS(generate_workload(neg, cat), ValidationError);
    WorkloadConfig zeroq;
    zeroq.viewer_quality_weights = {0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(generate_workload(zeroq, cat), ValidationError);
}
