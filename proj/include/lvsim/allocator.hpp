#pragma once
// Online per-slot allocation against a capacity ledger of reserved and
// on-demand instances. Three strategies share one engine:
//
//   gnca - nearest region with a free reserved instance inside the delay
//          threshold; then, while the per-video dissatisfaction budget
//          allows, the nearest reserved instance anywhere; then the cheapest
//          on-demand instance inside the threshold.
//   gca  - the same phases, but candidate regions are ordered by ascending
//          on-demand price instead of distance.
//   gmc  - on-demand only: cheapest region inside the threshold.
//
// All strategies reuse a placement already created for the same (video,
// quality) in a region instead of taking another instance, and fall back to
// the cheapest region with any remaining capacity (ignoring the threshold,
// counted dissatisfied) before declaring a demand unserved. Videos are
// processed by descending total viewers; demands by ascending region, then
// descending quality.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lvsim/core.hpp"
#include "lvsim/pricing.hpp"

namespace lvsim {

struct CapacityLedger {
    std::vector<Viewers> reserved_free;
    std::vector<Viewers> reserved_used;
    std::vector<Viewers> on_demand_free;
    std::vector<Viewers> on_demand_used;

    static CapacityLedger make(const std::vector<Viewers>& reserved,
                               Viewers on_demand_limit_per_region);
    int regions() const { return static_cast<int>(reserved_free.size()); }
};

struct AllocatorConfig {
    double delay_threshold_ms = 120.0;
    int diss_threshold_bp = 0;  // dissatisfaction budget in basis points of viewers
    // When set, the dissatisfaction guard checks the budget before adding the
    // current demand (so a single allocation may overshoot it); by default the
    // guard is applied to the post-allocation ratio.
    bool literal_diss_guard = false;

    static int percent_to_bp(double percent);
};

enum class InstanceKind { reserved, on_demand };

struct ServedEntry {
    int serving_region = 0;
    bool satisfied = true;  // delay within the threshold
    bool operator==(const ServedEntry&) const = default;
};

struct VideoOutcome {
    std::size_t video_index = 0;  // position in the slot's video list
    std::string video_id;
    Viewers cvn = 0;  // viewers seen so far
    Viewers dvn = 0;  // viewers served beyond the threshold
    std::map<Placement, InstanceKind> placements;
    std::map<DemandKey, ServedEntry> served;
    std::vector<DemandKey> unserved;

    bool operator==(const VideoOutcome&) const = default;
};

struct SlotOutcome {
    std::vector<VideoOutcome> videos;  // in processing order

    bool operator==(const SlotOutcome&) const = default;
};

// Processing order: descending total viewers, ties by ascending video id.
std::vector<std::size_t> rank_videos(const std::vector<VideoMeta>& videos,
                                     const std::vector<DemandMatrix>& demands);

SlotOutcome gnca_allocate_slot(const std::vector<VideoMeta>& videos,
                               const std::vector<DemandMatrix>& demands,
                               CapacityLedger& ledger, const RttMatrix& rtt,
                               const PriceBook& prices, const AllocatorConfig& cfg);

SlotOutcome gca_allocate_slot(const std::vector<VideoMeta>& videos,
                              const std::vector<DemandMatrix>& demands,
                              CapacityLedger& ledger, const RttMatrix& rtt,
                              const PriceBook& prices, const AllocatorConfig& cfg);

SlotOutcome gmc_allocate_slot(const std::vector<VideoMeta>& videos,
                              const std::vector<DemandMatrix>& demands,
                              CapacityLedger& ledger, const RttMatrix& rtt,
                              const PriceBook& prices, const AllocatorConfig& cfg);

struct SlotMetrics {
    double total_cost = 0.0;
    double avg_latency_ms = 0.0;  // over served viewers
    double hit_pct = 0.0;         // viewers served from their own region
    double on_demand_pct = 0.0;   // viewers served from on-demand placements
    double diss_pct = 0.0;        // viewers served beyond the threshold
    Viewers unserved_viewers = 0;
    Viewers total_viewers = 0;
    Viewers served_viewers = 0;
};

// Cost covers the whole reservation (idle or not) at the discounted rate,
// on-demand instances actually taken at the full rate, plus migration and
// delivery of the realized placements. Percentages are over all viewers of
// the slot; latency is over served viewers only. An empty slot yields an
// all-zero row.
SlotMetrics compute_slot_metrics(const SlotOutcome& outcome,
                                 const std::vector<VideoMeta>& videos,
                                 const std::vector<DemandMatrix>& demands,
                                 const CapacityLedger& ledger, const RttMatrix& rtt,
                                 const PriceBook& prices,
                                 const std::vector<Viewers>& reserved);

}  // namespace lvsim
