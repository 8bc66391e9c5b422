#pragma once
// Exact per-video placement optimizer. For one video it chooses where each
// requested quality is transcoded and which site serves each regional
// demand, minimizing rental + migration + delivery cost subject to the
// viewer-weighted mean delay staying under the threshold. Videos never share
// instances, so a slot decomposes into independent per-video solves.
//
// solve_video runs a branch-and-bound over per-demand serving choices with
// placements induced by use; brute_force_video is the deliberately naive
// exhaustive check used to validate it on small instances. Both apply the
// same preference order on cost ties: fewer placements, then lowest region
// indices.

#include <cstdint>
#include <vector>

#include "lvsim/core.hpp"
#include "lvsim/forecast.hpp"
#include "lvsim/pricing.hpp"

namespace lvsim {

// The delay threshold cannot be met even with every demand served from its
// lowest-delay site.
struct InfeasibleError : Error {
    using Error::Error;
};

// The exhaustive check would enumerate too many combinations.
struct ExplosionGuardError : Error {
    using Error::Error;
};

// A slot is missing from an otherwise contiguous horizon.
struct GapInHorizonError : Error {
    using Error::Error;
};

struct OptimizerConfig {
    double delay_threshold_ms = 120.0;
    double tolerance = 1e-9;  // cost comparison slack
    std::int64_t node_limit = 4'000'000;
};

struct VideoSolve {
    AllocationPlan plan;
    double cost = 0.0;
    double avg_latency_ms = 0.0;
    bool node_limit_hit = false;  // best-known plan returned, optimality not proven
};

VideoSolve solve_video(const VideoMeta& video, const DemandMatrix& demand,
                       const RttMatrix& rtt, const PriceBook& prices,
                       const OptimizerConfig& cfg);

VideoSolve brute_force_video(const VideoMeta& video, const DemandMatrix& demand,
                             const RttMatrix& rtt, const PriceBook& prices,
                             const OptimizerConfig& cfg);

struct SlotSolution {
    SlotIndex slot = 0;
    std::vector<AllocationPlan> plans;  // parallel to the slot's video list
    std::vector<Viewers> instance_counts;
    double objective = 0.0;
    std::vector<double> per_video_latency;
    bool node_limit_hit = false;
};

SlotSolution solve_slot(SlotIndex slot, const std::vector<VideoMeta>& videos,
                        const std::vector<DemandMatrix>& demands, const RttMatrix& rtt,
                        const PriceBook& prices, const OptimizerConfig& cfg);

// Reorders solutions by slot and lays instance counts out as one series per
// region. Throws GapInHorizonError on missing or duplicated slots.
std::vector<InstanceSeries> aggregate_instance_counts(
    const std::vector<SlotSolution>& solutions, int regions);

}  // namespace lvsim
