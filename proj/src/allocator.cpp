#include "lvsim/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lvsim {
namespace {

constexpr double kDelayEps = 1e-9;

enum class Strategy { gnca, gca, gmc };

struct Engine {
    Strategy strategy;
    const RttMatrix& rtt;
    const PriceBook& prices;
    const AllocatorConfig& cfg;
    CapacityLedger& ledger;
    std::vector<std::vector<int>> by_distance;  // per viewer region
    std::vector<int> by_price;

    Engine(Strategy s, const RttMatrix& r, const PriceBook& p,
           const AllocatorConfig& c, CapacityLedger& l)
        : strategy(s), rtt(r), prices(p), cfg(c), ledger(l) {
        const int n = rtt.regions();
        by_price.resize(static_cast<std::size_t>(n));
        std::iota(by_price.begin(), by_price.end(), 0);
        std::sort(by_price.begin(), by_price.end(), [&](int a, int b) {
            if (prices.zeta[static_cast<std::size_t>(a)] !=
                prices.zeta[static_cast<std::size_t>(b)])
                return prices.zeta[static_cast<std::size_t>(a)] <
                       prices.zeta[static_cast<std::size_t>(b)];
            return a < b;
        });
        by_distance.resize(static_cast<std::size_t>(n));
        for (int rw = 0; rw < n; ++rw) {
            auto& order = by_distance[static_cast<std::size_t>(rw)];
            order.resize(static_cast<std::size_t>(n));
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                if (rtt.at(a, rw) != rtt.at(b, rw)) return rtt.at(a, rw) < rtt.at(b, rw);
                return a < b;
            });
        }
    }

    // Candidate order for the reserved phases: distance for gnca, price for gca.
    const std::vector<int>& reserve_order(int viewer_region) const {
        if (strategy == Strategy::gca) return by_price;
        return by_distance[static_cast<std::size_t>(viewer_region)];
    }

    bool within(int serving, int viewer) const {
        return rtt.at(serving, viewer) <= cfg.delay_threshold_ms + kDelayEps;
    }

    bool diss_budget_allows(const VideoOutcome& vo, Viewers p) const {
        // Exact rational comparison of the dissatisfaction share against the
        // budget, in basis points: diss/viewers <= bp/10000.
        const Viewers dvn = cfg.literal_diss_guard ? vo.dvn : vo.dvn + p;
        return dvn * 10000 <= static_cast<Viewers>(cfg.diss_threshold_bp) * vo.cvn;
    }

    void take(VideoOutcome& vo, Quality q, int region, InstanceKind kind) {
        vo.placements.emplace(Placement{q, region}, kind);
        if (kind == InstanceKind::reserved) {
            --ledger.reserved_free[static_cast<std::size_t>(region)];
            ++ledger.reserved_used[static_cast<std::size_t>(region)];
        } else {
            --ledger.on_demand_free[static_cast<std::size_t>(region)];
            ++ledger.on_demand_used[static_cast<std::size_t>(region)];
        }
    }

    void serve(VideoOutcome& vo, const DemandKey& key, Viewers p, int region) {
        const bool satisfied = within(region, key.region);
        vo.served[key] = {region, satisfied};
        if (!satisfied) vo.dvn += p;
    }

    bool placed(const VideoOutcome& vo, Quality q, int region) const {
        return vo.placements.count(Placement{q, region}) > 0;
    }

    void handle_demand(VideoOutcome& vo, Quality q, int rw, Viewers p) {
        const DemandKey key{q, rw};
        vo.cvn += p;

        if (strategy == Strategy::gmc) {
            // Cheapest on-demand region within the threshold, reusing an
            // existing placement when one is already there.
            for (int r : by_price) {
                if (!within(r, rw)) continue;
                if (placed(vo, q, r)) return serve(vo, key, p, r);
                if (ledger.on_demand_free[static_cast<std::size_t>(r)] > 0) {
                    take(vo, q, r, InstanceKind::on_demand);
                    return serve(vo, key, p, r);
                }
            }
            for (int r : by_price) {
                if (placed(vo, q, r)) return serve(vo, key, p, r);
                if (ledger.on_demand_free[static_cast<std::size_t>(r)] > 0) {
                    take(vo, q, r, InstanceKind::on_demand);
                    return serve(vo, key, p, r);
                }
            }
            vo.unserved.push_back(key);
            return;
        }

        // Reserved instance (or an existing placement) within the threshold.
        for (int r : reserve_order(rw)) {
            if (!within(r, rw)) {
                if (strategy == Strategy::gnca) break;  // distance order: rest are farther
                continue;
            }
            if (placed(vo, q, r)) return serve(vo, key, p, r);
            if (ledger.reserved_free[static_cast<std::size_t>(r)] > 0) {
                take(vo, q, r, InstanceKind::reserved);
                return serve(vo, key, p, r);
            }
        }

        // Reserved instance anywhere, if the dissatisfaction budget allows.
        // Within-threshold capacity was exhausted above, so anything found
        // here is beyond the threshold.
        if (diss_budget_allows(vo, p)) {
            for (int r : reserve_order(rw)) {
                if (placed(vo, q, r)) return serve(vo, key, p, r);
                if (ledger.reserved_free[static_cast<std::size_t>(r)] > 0) {
                    take(vo, q, r, InstanceKind::reserved);
                    return serve(vo, key, p, r);
                }
            }
        }

        // Cheapest on-demand region within the threshold.
        for (int r : by_price) {
            if (!within(r, rw)) continue;
            if (ledger.on_demand_free[static_cast<std::size_t>(r)] > 0) {
                take(vo, q, r, InstanceKind::on_demand);
                return serve(vo, key, p, r);
            }
        }

        // Last resort, ignoring the threshold: an existing placement
        // anywhere, then the cheapest region with any remaining capacity.
        for (int r : reserve_order(rw))
            if (placed(vo, q, r)) return serve(vo, key, p, r);
        for (int r : by_price) {
            if (ledger.reserved_free[static_cast<std::size_t>(r)] > 0) {
                take(vo, q, r, InstanceKind::reserved);
                return serve(vo, key, p, r);
            }
            if (ledger.on_demand_free[static_cast<std::size_t>(r)] > 0) {
                take(vo, q, r, InstanceKind::on_demand);
                return serve(vo, key, p, r);
            }
        }
        vo.unserved.push_back(key);
    }
};

SlotOutcome allocate(Strategy strategy, const std::vector<VideoMeta>& videos,
                     const std::vector<DemandMatrix>& demands, CapacityLedger& ledger,
                     const RttMatrix& rtt, const PriceBook& prices,
                     const AllocatorConfig& cfg) {
    if (videos.size() != demands.size())
        throw ValidationError("video/demand count mismatch");
    if (ledger.regions() != rtt.regions() || rtt.regions() != prices.regions())
        throw ValidationError("region counts of ledger, rtt and prices disagree");
    Engine engine(strategy, rtt, prices, cfg, ledger);
    SlotOutcome out;
    for (std::size_t idx : rank_videos(videos, demands)) {
        VideoOutcome vo;
        vo.video_index = idx;
        vo.video_id = videos[idx].video_id;
        for (const auto& e : demands[idx].entries())
            engine.handle_demand(vo, e.quality, e.region, e.viewers);
        out.videos.push_back(std::move(vo));
    }
    return out;
}

}  // namespace

CapacityLedger CapacityLedger::make(const std::vector<Viewers>& reserved,
                                    Viewers on_demand_limit_per_region) {
    if (on_demand_limit_per_region < 0)
        throw ValidationError("negative on-demand limit");
    for (Viewers r : reserved)
        if (r < 0) throw ValidationError("negative reservation count");
    CapacityLedger l;
    l.reserved_free = reserved;
    l.reserved_used.assign(reserved.size(), 0);
    l.on_demand_free.assign(reserved.size(), on_demand_limit_per_region);
    l.on_demand_used.assign(reserved.size(), 0);
    return l;
}

int AllocatorConfig::percent_to_bp(double percent) {
    if (percent < 0 || percent > 100)
        throw ValidationError("dissatisfaction budget must be a percentage");
    return static_cast<int>(std::llround(percent * 100.0));
}

std::vector<std::size_t> rank_videos(const std::vector<VideoMeta>& videos,
                                     const std::vector<DemandMatrix>& demands) {
    if (videos.size() != demands.size())
        throw ValidationError("video/demand count mismatch");
    std::vector<std::size_t> order(videos.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Viewers ta = demands[a].total_viewers();
        const Viewers tb = demands[b].total_viewers();
        if (ta != tb) return ta > tb;
        return videos[a].video_id < videos[b].video_id;
    });
    return order;
}

SlotOutcome gnca_allocate_slot(const std::vector<VideoMeta>& videos,
                               const std::vector<DemandMatrix>& demands,
                               CapacityLedger& ledger, const RttMatrix& rtt,
                               const PriceBook& prices, const AllocatorConfig& cfg) {
    return allocate(Strategy::gnca, videos, demands, ledger, rtt, prices, cfg);
}

SlotOutcome gca_allocate_slot(const std::vector<VideoMeta>& videos,
                              const std::vector<DemandMatrix>& demands,
                              CapacityLedger& ledger, const RttMatrix& rtt,
                              const PriceBook& prices, const AllocatorConfig& cfg) {
    return allocate(Strategy::gca, videos, demands, ledger, rtt, prices, cfg);
}

SlotOutcome gmc_allocate_slot(const std::vector<VideoMeta>& videos,
                              const std::vector<DemandMatrix>& demands,
                              CapacityLedger& ledger, const RttMatrix& rtt,
                              const PriceBook& prices, const AllocatorConfig& cfg) {
    return allocate(Strategy::gmc, videos, demands, ledger, rtt, prices, cfg);
}

SlotMetrics compute_slot_metrics(const SlotOutcome& outcome,
                                 const std::vector<VideoMeta>& videos,
                                 const std::vector<DemandMatrix>& demands,
                                 const CapacityLedger& ledger, const RttMatrix& rtt,
                                 const PriceBook& prices,
                                 const std::vector<Viewers>& reserved) {
    if (videos.size() != demands.size())
        throw ValidationError("video/demand count mismatch");
    SlotMetrics m;
    double weighted_delay = 0.0;
    Viewers hit = 0, on_demand = 0, dissatisfied = 0;

    std::vector<AllocationPlan> plans(videos.size());
    for (const auto& vo : outcome.videos) {
        if (vo.video_index >= videos.size())
            throw ValidationError("outcome references a video outside the slot");
        auto& plan = plans[vo.video_index];
        const auto& demand = demands[vo.video_index];
        for (const auto& [placement, kind] : vo.placements) {
            (void)kind;
            plan.placements.insert(placement);
        }
        for (const auto& [key, entry] : vo.served) {
            plan.assignments[key] = entry.serving_region;
            const Viewers p = demand.at(key.region, key.quality);
            m.served_viewers += p;
            weighted_delay += static_cast<double>(p) * rtt.at(entry.serving_region, key.region);
            if (entry.serving_region == key.region) hit += p;
            auto it = vo.placements.find(Placement{key.quality, entry.serving_region});
            if (it == vo.placements.end())
                throw ValidationError("served demand has no backing placement");
            if (it->second == InstanceKind::on_demand) on_demand += p;
        }
        for (const auto& key : vo.unserved)
            m.unserved_viewers += demand.at(key.region, key.quality);
        m.total_viewers += vo.cvn;
        dissatisfied += vo.dvn;
    }

    m.total_cost = phase2_cost(reserved, ledger.on_demand_used, plans, videos, demands, prices);
    if (m.served_viewers > 0)
        m.avg_latency_ms = weighted_delay / static_cast<double>(m.served_viewers);
    if (m.total_viewers > 0) {
        m.hit_pct = 100.0 * static_cast<double>(hit) / static_cast<double>(m.total_viewers);
        m.on_demand_pct =
            100.0 * static_cast<double>(on_demand) / static_cast<double>(m.total_viewers);
        m.diss_pct =
            100.0 * static_cast<double>(dissatisfied) / static_cast<double>(m.total_viewers);
    }
    return m;
}

}  // namespace lvsim
