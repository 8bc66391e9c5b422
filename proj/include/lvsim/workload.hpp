#pragma once
// Region catalog, geography helpers, and the hourly workload model: either a
// deterministic synthetic generator (diurnal arrival profile, power-law
// viewer counts across the videos of an hour, configurable regional and
// quality mixes) or ingestion from CSV traces.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lvsim/core.hpp"
#include "lvsim/pricing.hpp"

namespace lvsim {

struct RegionCatalog {
    std::vector<RegionInfo> regions;

    int size() const { return static_cast<int>(regions.size()); }
    int index_of(const std::string& name) const;  // throws on unknown name
};

// Ten commercial cloud regions with approximate data-center coordinates.
RegionCatalog default_region_catalog();

// Symmetric delays derived from great-circle distance with a constant
// per-kilometre factor and a fixed overhead, floored at the local-serving
// delay of 8.8 ms which also fills the diagonal.
RttMatrix default_rtt_matrix(const RegionCatalog& catalog);

// Plausible public-cloud list prices; the reserved rate is one quarter of
// the on-demand rate everywhere.
PriceBook default_price_book();

double haversine_km(double lat1, double lon1, double lat2, double lon2);

// Nearest catalog region by great-circle distance, ties to the lowest index.
int map_to_region(double lat, double lon, const RegionCatalog& catalog);

// Nearest rendition height among 240/360/480/720, ties upward, capped at 720.
Quality classify_bitrate(int width, int height);
Quality classify_height(int height);

struct SlotWorkload {
    SlotIndex slot = 0;
    std::vector<VideoMeta> videos;
    std::vector<DemandMatrix> demands;

    bool operator==(const SlotWorkload&) const = default;
};

using Workload = std::vector<SlotWorkload>;

struct WorkloadConfig {
    int horizon_hours = 72;
    // Video arrivals per hour of day.
    std::array<int, 24> videos_per_hour{4, 3, 2, 2, 2, 3, 4,  6,  8,  10, 12, 14,
                                        15, 16, 16, 15, 14, 13, 12, 12, 11, 9, 7, 5};
    double zipf_exponent = 0.9;       // viewer share across the videos of an hour
    double viewers_per_video = 12.0;  // mean pool size per video
    std::vector<double> broadcast_region_weights;  // empty: catalog defaults
    std::vector<double> viewer_region_weights;     // empty: catalog defaults
    std::array<double, kQualityCount> broadcast_quality_weights{0.08, 0.17, 0.30, 0.45};
    std::array<double, kQualityCount> viewer_quality_weights{0.15, 0.25, 0.35, 0.25};
    // Per-region override of the viewer quality mix; empty means every region
    // uses the shared vector above.
    std::vector<std::array<double, kQualityCount>> viewer_quality_mix_by_region;
    std::uint64_t seed = 42;

    bool operator==(const WorkloadConfig&) const = default;
};

// Normalized power-law masses 1/k^s for ranks 1..n.
std::vector<double> zipf_masses(int n, double exponent);

// Deterministic for a fixed config: same seed, same workload, bit for bit.
// Requested qualities are clamped to each video's broadcast quality.
Workload generate_workload(const WorkloadConfig& cfg, const RegionCatalog& catalog);

}  // namespace lvsim
