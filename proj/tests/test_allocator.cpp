#include "doctest.h"

#include <random>

#include "lvsim/allocator.hpp"

using namespace lvsim;

namespace {

// Three regions: 0 and 1 are 20 ms apart, 2 is far from both. Region 1 rents
// cheapest, region 0 dearest, so price order and distance order disagree.
RttMatrix tri_rtt() {
    return RttMatrix::from_rows({{8.8, 20.0, 100.0},
                                 {20.0, 8.8, 150.0},
                                 {100.0, 150.0, 8.8}});
}

PriceBook tri_prices() {
    PriceBook p;
    p.zeta = {0.10, 0.04, 0.06};
    p.mu = {0.025, 0.01, 0.015};
    p.eta = {0.02, 0.02, 0.02};
    p.omega = {0.05, 0.05, 0.05};
    return p;
}

AllocatorConfig cfg_of(double delay, int bp = 0, bool literal = false) {
    AllocatorConfig c;
    c.delay_threshold_ms = delay;
    c.diss_threshold_bp = bp;
    c.literal_diss_guard = literal;
    return c;
}

VideoMeta video(const std::string& id, int region, Quality q = Quality::q720) {
    return {id, 0, region, q};
}

const VideoOutcome& outcome_of(const SlotOutcome& slot, const std::string& id) {
    for (const auto& vo : slot.videos)
        if (vo.video_id == id) return vo;
    REQUIRE(false);
    return slot.videos.front();
}

}  // namespace

TEST_CASE("capacity ledger construction") {
    auto l = CapacityLedger::make({2, 0, 1}, 5);
    CHECK(l.regions() == 3);
    CHECK(l.reserved_free == std::vector<Viewers>{2, 0, 1});
    CHECK(l.reserved_used == std::vector<Viewers>{0, 0, 0});
    CHECK(l.on_demand_free == std::vector<Viewers>{5, 5, 5});
    CHECK(l.on_demand_used == std::vector<Viewers>{0, 0, 0});
    CHECK_THROWS_AS(CapacityLedger::make({-1}, 5), ValidationError);
    CHECK_THROWS_AS(CapacityLedger::make({1}, -1), ValidationError);
}

TEST_CASE("dissatisfaction budgets convert to basis points") {
    CHECK(AllocatorConfig::percent_to_bp(0.0) == 0);
    CHECK(AllocatorConfig::percent_to_bp(10.0) == 1000);
    CHECK(AllocatorConfig::percent_to_bp(0.07) == 7);
    CHECK(AllocatorConfig::percent_to_bp(100.0) == 10000);
    CHECK_THROWS_AS(AllocatorConfig::percent_to_bp(-0.1), ValidationError);
    CHECK_THROWS_AS(AllocatorConfig::percent_to_bp(100.1), ValidationError);
}

TEST_CASE("videos rank by viewers, ties by id") {
    std::vector<VideoMeta> vids{video("c", 0), video("a", 1), video("b", 2)};
    std::vector<DemandMatrix> dems(3, DemandMatrix(3));
    dems[0].add(0, Quality::q720, 5);
    dems[1].add(1, Quality::q720, 9);
    dems[2].add(2, Quality::q720, 5);
    CHECK(rank_videos(vids, dems) == std::vector<std::size_t>{1, 2, 0});
    CHECK_THROWS_AS(rank_videos(vids, {dems[0]}), ValidationError);
}

TEST_CASE("nearest-first reserved phase") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();
    std::vector<VideoMeta> vids{video("a", 0)};
    std::vector<DemandMatrix> dems{DemandMatrix(3)};
    dems[0].add(0, Quality::q720, 4);

    SUBCASE("local reserved instance wins outright") {
        auto ledger = CapacityLedger::make({1, 0, 0}, 5);
        auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0));
        const auto& vo = outcome_of(out, "a");
        CHECK(vo.placements.at({Quality::q720, 0}) == InstanceKind::reserved);
        CHECK(vo.served.at({Quality::q720, 0}) == ServedEntry{0, true});
        CHECK(vo.cvn == 4);
        CHECK(vo.dvn == 0);
        CHECK(ledger.reserved_used == std::vector<Viewers>{1, 0, 0});
        CHECK(ledger.on_demand_used == std::vector<Viewers>{0, 0, 0});
    }
    SUBCASE("a farther reserved instance beats a closer on-demand one") {
        auto ledger = CapacityLedger::make({0, 1, 0}, 5);
        auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0));
        const auto& vo = outcome_of(out, "a");
        CHECK(vo.placements.at({Quality::q720, 1}) == InstanceKind::reserved);
        CHECK(vo.served.at({Quality::q720, 0}) == ServedEntry{1, true});
        CHECK(ledger.on_demand_used == std::vector<Viewers>{0, 0, 0});
    }
    SUBCASE("zero budget ignores out-of-range reserved capacity") {
        auto ledger = CapacityLedger::make({0, 0, 1}, 5);
        auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0, 0));
        const auto& vo = outcome_of(out, "a");
        // The reserved instance sits 100 ms away; with no dissatisfaction
        // budget the demand goes to the cheapest in-range on-demand region.
        CHECK(vo.placements.at({Quality::q720, 1}) == InstanceKind::on_demand);
        CHECK(vo.served.at({Quality::q720, 0}) == ServedEntry{1, true});
        CHECK(vo.dvn == 0);
        CHECK(ledger.reserved_used == std::vector<Viewers>{0, 0, 0});
    }
    SUBCASE("a full budget lets the far reserved instance serve") {
        auto ledger = CapacityLedger::make({0, 0, 1}, 5);
        auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices,
                                      cfg_of(20.0, 10000));
        const auto& vo = outcome_of(out, "a");
        CHECK(vo.placements.at({Quality::q720, 2}) == InstanceKind::reserved);
        CHECK(vo.served.at({Quality::q720, 0}) == ServedEntry{2, false});
        CHECK(vo.dvn == 4);
    }
    SUBCASE("no capacity anywhere leaves the demand unserved") {
        auto ledger = CapacityLedger::make({0, 0, 0}, 0);
        auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0));
        const auto& vo = outcome_of(out, "a");
        CHECK(vo.served.empty());
        CHECK(vo.placements.empty());
        CHECK(vo.unserved == std::vector<DemandKey>{{Quality::q720, 0}});
        CHECK(vo.cvn == 4);
    }
}

TEST_CASE("one placement serves later demands of the same video and quality") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();
    std::vector<VideoMeta> vids{video("a", 0)};
    std::vector<DemandMatrix> dems{DemandMatrix(3)};
    dems[0].add(0, Quality::q720, 3);
    dems[0].add(1, Quality::q720, 2);
    auto ledger = CapacityLedger::make({1, 0, 0}, 5);

    auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0));
    const auto& vo = outcome_of(out, "a");
    CHECK(vo.placements.size() == 1);
    CHECK(vo.served.at({Quality::q720, 0}) == ServedEntry{0, true});
    CHECK(vo.served.at({Quality::q720, 1}) == ServedEntry{0, true});
    CHECK(ledger.reserved_used == std::vector<Viewers>{1, 0, 0});
    CHECK(ledger.on_demand_used == std::vector<Viewers>{0, 0, 0});
}

TEST_CASE("price-first strategy picks the cheap region, distance-first the near one") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();
    std::vector<VideoMeta> vids{video("a", 0)};
    std::vector<DemandMatrix> dems{DemandMatrix(3)};
    dems[0].add(0, Quality::q720, 4);

    auto lg_near = CapacityLedger::make({1, 1, 0}, 5);
    auto near = gnca_allocate_slot(vids, dems, lg_near, rtt, prices, cfg_of(20.0));
    CHECK(outcome_of(near, "a").served.at({Quality::q720, 0}) == ServedEntry{0, true});

    auto lg_cheap = CapacityLedger::make({1, 1, 0}, 5);
    auto cheap = gca_allocate_slot(vids, dems, lg_cheap, rtt, prices, cfg_of(20.0));
    CHECK(outcome_of(cheap, "a").served.at({Quality::q720, 0}) == ServedEntry{1, true});
    CHECK(lg_cheap.reserved_used == std::vector<Viewers>{0, 1, 0});
}

TEST_CASE("on-demand-only strategy") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();

    SUBCASE("reserved capacity is simply ignored") {
        std::vector<VideoMeta> vids{video("a", 0)};
        std::vector<DemandMatrix> dems{DemandMatrix(3)};
        dems[0].add(0, Quality::q720, 4);
        dems[0].add(1, Quality::q720, 2);
        auto ledger = CapacityLedger::make({5, 5, 5}, 5);
        auto out = gmc_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0));
        const auto& vo = outcome_of(out, "a");
        CHECK(vo.placements.size() == 1);
        CHECK(vo.placements.at({Quality::q720, 1}) == InstanceKind::on_demand);
        CHECK(vo.served.at({Quality::q720, 0}) == ServedEntry{1, true});
        CHECK(vo.served.at({Quality::q720, 1}) == ServedEntry{1, true});
        CHECK(ledger.reserved_used == std::vector<Viewers>{0, 0, 0});
        CHECK(ledger.on_demand_used == std::vector<Viewers>{0, 1, 0});
    }
    SUBCASE("a fully drained pool falls back to the video's far placement") {
        std::vector<VideoMeta> vids{video("a", 1), video("b", 0)};
        std::vector<DemandMatrix> dems{DemandMatrix(3), DemandMatrix(3)};
        dems[0].add(1, Quality::q720, 5);
        dems[0].add(2, Quality::q720, 4);
        dems[1].add(0, Quality::q720, 6);
        dems[1].add(2, Quality::q720, 1);
        auto ledger = CapacityLedger::make({0, 0, 0}, 1);
        auto out = gmc_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(8.8));
        // "a" (9 viewers) drains regions 1 and 2, "b" takes the last instance
        // in region 0; b's region-2 viewer then rides that existing placement
        // beyond the threshold rather than going unserved.
        const auto& a = outcome_of(out, "a");
        CHECK(a.served.at({Quality::q720, 1}) == ServedEntry{1, true});
        CHECK(a.served.at({Quality::q720, 2}) == ServedEntry{2, true});
        const auto& b = outcome_of(out, "b");
        CHECK(b.placements.size() == 1);
        CHECK(b.served.at({Quality::q720, 0}) == ServedEntry{0, true});
        CHECK(b.served.at({Quality::q720, 2}) == ServedEntry{0, false});
        CHECK(b.dvn == 1);
        CHECK(ledger.on_demand_free == std::vector<Viewers>{0, 0, 0});
    }
}

TEST_CASE("literal guard checks the budget before counting the current demand") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();
    std::vector<VideoMeta> vids{video("a", 0)};
    std::vector<DemandMatrix> dems{DemandMatrix(3)};
    dems[0].add(0, Quality::q720, 10);
    const int half = 5000;  // 50 percent budget

    // Post-allocation guard: serving all 10 viewers far would mean 100
    // percent dissatisfied, so the far reserved instance is skipped.
    auto lg1 = CapacityLedger::make({0, 0, 1}, 5);
    auto out1 = gnca_allocate_slot(vids, dems, lg1, rtt, prices, cfg_of(20.0, half));
    CHECK(outcome_of(out1, "a").served.at({Quality::q720, 0}) == ServedEntry{1, true});
    CHECK(outcome_of(out1, "a").dvn == 0);

    // Literal guard: zero dissatisfied so far passes the check, then the
    // single allocation overshoots the budget.
    auto lg2 = CapacityLedger::make({0, 0, 1}, 5);
    auto out2 =
        gnca_allocate_slot(vids, dems, lg2, rtt, prices, cfg_of(20.0, half, true));
    CHECK(outcome_of(out2, "a").served.at({Quality::q720, 0}) == ServedEntry{2, false});
    CHECK(outcome_of(out2, "a").dvn == 10);
}

TEST_CASE("slot metrics on a hand-traced slot") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();
    std::vector<VideoMeta> vids{video("a", 0, Quality::q720),
                                video("b", 1, Quality::q480)};
    std::vector<DemandMatrix> dems{DemandMatrix(3), DemandMatrix(3)};
    dems[0].add(0, Quality::q720, 10);
    dems[0].add(1, Quality::q480, 4);
    dems[1].add(2, Quality::q480, 7);
    const std::vector<Viewers> reserved{1, 0, 0};
    auto ledger = CapacityLedger::make(reserved, 5);

    auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0, 10000));
    auto m = compute_slot_metrics(out, vids, dems, ledger, rtt, prices, reserved);

    CHECK(m.total_viewers == 21);
    CHECK(m.served_viewers == 21);
    CHECK(m.unserved_viewers == 0);
    CHECK(m.avg_latency_ms == doctest::Approx(8.8));
    CHECK(m.hit_pct == doctest::Approx(100.0));
    // The two 480p placements run on demand: 4 + 7 of 21 viewers.
    CHECK(m.on_demand_pct == doctest::Approx(1100.0 / 21.0));
    CHECK(m.diss_pct == doctest::Approx(0.0));
    // mu0 + zeta1 + zeta2, migration 2 * 0.738 * 0.02 + 0.603 * 0.02,
    // delivery (10 * 0.738 + 4 * 0.603 + 7 * 0.603) * 0.05.
    CHECK(m.total_cost == doctest::Approx(0.86723).epsilon(1e-12));
}

TEST_CASE("slot metrics count far serving as full dissatisfaction") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();
    std::vector<VideoMeta> vids{video("a", 0)};
    std::vector<DemandMatrix> dems{DemandMatrix(3)};
    dems[0].add(0, Quality::q720, 4);
    const std::vector<Viewers> reserved{0, 0, 1};
    auto ledger = CapacityLedger::make(reserved, 5);
    auto out = gnca_allocate_slot(vids, dems, ledger, rtt, prices, cfg_of(20.0, 10000));
    auto m = compute_slot_metrics(out, vids, dems, ledger, rtt, prices, reserved);
    CHECK(m.avg_latency_ms == doctest::Approx(100.0));
    CHECK(m.hit_pct == doctest::Approx(0.0));
    CHECK(m.on_demand_pct == doctest::Approx(0.0));
    CHECK(m.diss_pct == doctest::Approx(100.0));
    // 0.015 reserved + 0.738 * 0.02 migration + 4 * 0.738 * 0.05 delivery.
    CHECK(m.total_cost == doctest::Approx(0.17736).epsilon(1e-12));
}

TEST_CASE("empty slot yields an all-zero metrics row") {
    auto rtt = tri_rtt();
    auto prices = tri_prices();
    auto ledger = CapacityLedger::make({0, 0, 0}, 5);
    auto m = compute_slot_metrics(SlotOutcome{}, {}, {}, ledger, rtt, prices, {0, 0, 0});
    CHECK(m.total_cost == 0.0);
    CHECK(m.avg_latency_ms == 0.0);
    CHECK(m.hit_pct == 0.0);
    CHECK(m.on_demand_pct == 0.0);
    CHECK(m.diss_pct == 0.0);
    CHECK(m.unserved_viewers == 0);
    CHECK(m.total_viewers == 0);
    CHECK(m.served_viewers == 0);
}

namespace {

int draw(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

struct RandomSlot {
    std::vector<VideoMeta> videos;
    std::vector<DemandMatrix> demands;
    RttMatrix rtt;
    PriceBook prices;
    std::vector<Viewers> reserved;
    Viewers od_limit = 0;
    AllocatorConfig cfg;
};

RandomSlot random_slot(std::mt19937_64& rng) {
    RandomSlot rs;
    const int n = draw(rng, 2, 4);
    std::vector<std::vector<double>> rows(n, std::vector<double>(n, 8.8));
    const double levels[] = {8.8, 15.0, 40.0, 90.0, 200.0};
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            rows[i][j] = rows[j][i] = levels[draw(rng, 0, 4)];
    rs.rtt = RttMatrix::from_rows(rows);

    for (int i = 0; i < n; ++i) {
        rs.prices.zeta.push_back(0.01 * draw(rng, 3, 12));
        rs.prices.mu.push_back(rs.prices.zeta.back() * 0.25);
        rs.prices.eta.push_back(0.01 * draw(rng, 1, 5));
        rs.prices.omega.push_back(0.01 * draw(rng, 4, 15));
        rs.reserved.push_back(draw(rng, 0, 3));
    }
    rs.od_limit = draw(rng, 0, 3);

    const int vids = draw(rng, 1, 5);
    for (int v = 0; v < vids; ++v) {
        const int qb = draw(rng, 0, kQualityCount - 1);
        rs.videos.push_back(video("v" + std::to_string(v), draw(rng, 0, n - 1),
                                  quality_at(qb)));
        DemandMatrix d(n);
        const int pairs = draw(rng, 0, 4);
        for (int k = 0; k < pairs; ++k)
            d.add(draw(rng, 0, n - 1), quality_at(draw(rng, 0, qb)), draw(rng, 1, 30));
        rs.demands.push_back(std::move(d));
    }

    const double thresholds[] = {8.8, 40.0, 1000.0};
    const int budgets[] = {0, 1000, 10000};
    rs.cfg = cfg_of(thresholds[draw(rng, 0, 2)], budgets[draw(rng, 0, 2)],
                    draw(rng, 0, 1) == 1);
    return rs;
}

using AllocateFn = SlotOutcome (*)(const std::vector<VideoMeta>&,
                                   const std::vector<DemandMatrix>&, CapacityLedger&,
                                   const RttMatrix&, const PriceBook&,
                                   const AllocatorConfig&);

void check_outcome_consistency(const RandomSlot& rs, const SlotOutcome& out,
                               const CapacityLedger& ledger) {
    REQUIRE(out.videos.size() == rs.videos.size());
    for (int r = 0; r < ledger.regions(); ++r) {
        const auto ri = static_cast<std::size_t>(r);
        CHECK(ledger.reserved_free[ri] >= 0);
        CHECK(ledger.reserved_used[ri] >= 0);
        CHECK(ledger.on_demand_free[ri] >= 0);
        CHECK(ledger.on_demand_used[ri] >= 0);
        CHECK(ledger.reserved_free[ri] + ledger.reserved_used[ri] == rs.reserved[ri]);
        CHECK(ledger.on_demand_free[ri] + ledger.on_demand_used[ri] == rs.od_limit);
    }
    Viewers placements_reserved = 0, placements_od = 0;
    for (const auto& vo : out.videos) {
        const auto& demand = rs.demands[vo.video_index];
        CHECK(vo.cvn == demand.total_viewers());
        Viewers far = 0;
        std::size_t covered = 0;
        for (const auto& e : demand.entries()) {
            const DemandKey key{e.quality, e.region};
            const bool served = vo.served.count(key) > 0;
            const bool unserved =
                std::count(vo.unserved.begin(), vo.unserved.end(), key) > 0;
            CHECK(served != unserved);
            covered += served || unserved;
            if (served) {
                const auto& entry = vo.served.at(key);
                CHECK(vo.placements.count({key.quality, entry.serving_region}) == 1);
                if (!entry.satisfied) far += e.viewers;
                CHECK(entry.satisfied ==
                      (rs.rtt.at(entry.serving_region, key.region) <=
                       rs.cfg.delay_threshold_ms + 1e-9));
            }
        }
        CHECK(covered == demand.entries().size());
        CHECK(vo.served.size() + vo.unserved.size() == demand.entries().size());
        CHECK(vo.dvn == far);
        for (const auto& [placement, kind] : vo.placements) {
            (void)placement;
            (kind == InstanceKind::reserved ? placements_reserved : placements_od) += 1;
        }
    }
    Viewers used_reserved = 0, used_od = 0;
    for (int r = 0; r < ledger.regions(); ++r) {
        used_reserved += ledger.reserved_used[static_cast<std::size_t>(r)];
        used_od += ledger.on_demand_used[static_cast<std::size_t>(r)];
    }
    CHECK(placements_reserved == used_reserved);
    CHECK(placements_od == used_od);

    auto m = compute_slot_metrics(out, rs.videos, rs.demands, ledger, rs.rtt,
                                  rs.prices, rs.reserved);
    CHECK(m.hit_pct >= 0.0);
    CHECK(m.hit_pct <= 100.0 + 1e-9);
    CHECK(m.on_demand_pct <= 100.0 + 1e-9);
    CHECK(m.diss_pct <= 100.0 + 1e-9);
    CHECK(m.total_cost >= 0.0);
    CHECK(m.served_viewers + m.unserved_viewers == m.total_viewers);
}

}  // namespace

TEST_CASE("random slots: ledger conservation, coverage and determinism") {
    std::mt19937_64 rng(987654321);
    const AllocateFn fns[] = {&gnca_allocate_slot, &gca_allocate_slot,
                              &gmc_allocate_slot};
    for (int it = 0; it < 300; ++it) {
        CAPTURE(it);
        RandomSlot rs = random_slot(rng);
        for (AllocateFn fn : fns) {
            auto ledger1 = CapacityLedger::make(rs.reserved, rs.od_limit);
            auto out1 = fn(rs.videos, rs.demands, ledger1, rs.rtt, rs.prices, rs.cfg);
            check_outcome_consistency(rs, out1, ledger1);

            auto ledger2 = CapacityLedger::make(rs.reserved, rs.od_limit);
            auto out2 = fn(rs.videos, rs.demands, ledger2, rs.rtt, rs.prices, rs.cfg);
            CHECK(out1 == out2);
            CHECK(ledger1.reserved_used == ledger2.reserved_used);
            CHECK(ledger1.on_demand_used == ledger2.on_demand_used);
        }
    }
}

TEST_CASE("with nothing reserved the nearest-first strategy runs on demand only") {
    std::mt19937_64 rng(24680);
    for (int it = 0; it < 60; ++it) {
        CAPTURE(it);
        RandomSlot rs = random_slot(rng);
        std::fill(rs.reserved.begin(), rs.reserved.end(), 0);
        rs.od_limit = 3;
        auto ledger = CapacityLedger::make(rs.reserved, rs.od_limit);
        auto out =
            gnca_allocate_slot(rs.videos, rs.demands, ledger, rs.rtt, rs.prices, rs.cfg);
        for (const auto& vo : out.videos)
            for (const auto& [placement, kind] : vo.placements) {
                (void)placement;
                CHECK(kind == InstanceKind::on_demand);
            }
        CHECK(ledger.reserved_used ==
              std::vector<Viewers>(static_cast<std::size_t>(ledger.regions()), 0));
    }
}
