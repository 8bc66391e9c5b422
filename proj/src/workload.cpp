#include "lvsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace lvsim {
namespace {

constexpr double kEarthRadiusKm = 6371.0;
constexpr double kLocalDelayMs = 8.8;
// Delay model for the default matrix: fixed overhead plus a per-kilometre
// great-circle term, rounded to a tenth of a millisecond.
constexpr double kMsPerKm = 0.0137;
constexpr double kOverheadMs = 5.0;

double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Draw an index with probability proportional to its weight.
int categorical(std::mt19937_64& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0) throw ValidationError("weights must have positive mass");
    double u = unit_uniform(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

std::vector<double> default_region_weights() {
    return {0.13, 0.16, 0.10, 0.05, 0.09, 0.10, 0.07, 0.10, 0.09, 0.11};
}

std::vector<double> region_weights_or_default(const std::vector<double>& weights,
                                              int regions) {
    if (!weights.empty()) {
        if (static_cast<int>(weights.size()) != regions)
            throw ValidationError("region weight vector does not match the catalog");
        for (double w : weights)
            if (w < 0) throw ValidationError("negative region weight");
        return weights;
    }
    if (regions == 10) return default_region_weights();
    return std::vector<double>(static_cast<std::size_t>(regions),
                               1.0 / static_cast<double>(regions));
}

}  // namespace

int RegionCatalog::index_of(const std::string& name) const {
    for (const auto& r : regions)
        if (r.name == name) return r.index;
    throw ValidationError("unknown region name: " + name);
}

RegionCatalog default_region_catalog() {
    RegionCatalog c;
    auto add = [&](const std::string& name, double lat, double lon) {
        c.regions.push_back({c.size(), name, lat, lon});
    };
    add("california", 37.35, -121.96);
    add("virginia", 38.95, -77.45);
    add("ohio", 40.00, -83.00);
    add("sao-paulo", -23.55, -46.63);
    add("paris", 48.86, 2.35);
    add("frankfurt", 50.11, 8.68);
    add("ningxia", 38.47, 106.27);
    add("singapore", 1.35, 103.82);
    add("seoul", 37.57, 126.98);
    add("mumbai", 19.08, 72.88);
    return c;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    const double phi1 = to_radians(lat1);
    const double phi2 = to_radians(lat2);
    const double dphi = to_radians(lat2 - lat1);
    const double dlambda = to_radians(lon2 - lon1);
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) *
                         std::sin(dlambda / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

int map_to_region(double lat, double lon, const RegionCatalog& catalog) {
    if (catalog.size() == 0) throw ValidationError("empty region catalog");
    int best = 0;
    double best_km = haversine_km(lat, lon, catalog.regions[0].lat, catalog.regions[0].lon);
    for (int i = 1; i < catalog.size(); ++i) {
        const double km =
            haversine_km(lat, lon, catalog.regions[static_cast<std::size_t>(i)].lat,
                         catalog.regions[static_cast<std::size_t>(i)].lon);
        if (km < best_km) {
            best_km = km;
            best = i;
        }
    }
    return best;
}

Quality classify_height(int height) {
    if (height <= 0) throw ValidationError("video dimensions must be positive");
    int chosen = 0;
    int best_dist = std::abs(height - kQualityHeights[0]);
    for (int i = 1; i < kQualityCount; ++i) {
        const int dist = std::abs(height - kQualityHeights[static_cast<std::size_t>(i)]);
        if (dist <= best_dist) {  // ties resolve upward
            best_dist = dist;
            chosen = i;
        }
    }
    return quality_at(chosen);
}

Quality classify_bitrate(int width, int height) {
    if (width <= 0 || height <= 0)
        throw ValidationError("video dimensions must be positive");
    return classify_height(height);
}

RttMatrix default_rtt_matrix(const RegionCatalog& catalog) {
    const int n = catalog.size();
    RttMatrix m(n, kLocalDelayMs);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double km = haversine_km(
                catalog.regions[static_cast<std::size_t>(i)].lat,
                catalog.regions[static_cast<std::size_t>(i)].lon,
                catalog.regions[static_cast<std::size_t>(j)].lat,
                catalog.regions[static_cast<std::size_t>(j)].lon);
            double ms = std::round((kOverheadMs + kMsPerKm * km) * 10.0) / 10.0;
            ms = std::max(ms, kLocalDelayMs);
            m.set(i, j, ms);
            m.set(j, i, ms);
        }
    return m;
}

PriceBook default_price_book() {
    PriceBook p;
    p.zeta = {0.106, 0.085, 0.085, 0.131, 0.101, 0.097, 0.098, 0.098, 0.096, 0.085};
    p.mu.reserve(p.zeta.size());
    for (double z : p.zeta) p.mu.push_back(z * 0.25);
    p.eta = {0.02, 0.02, 0.02, 0.138, 0.02, 0.02, 0.093, 0.09, 0.08, 0.086};
    p.omega = {0.09, 0.09, 0.09, 0.25, 0.09, 0.09, 0.123, 0.12, 0.126, 0.109};
    return p;
}

std::vector<double> zipf_masses(int n, double exponent) {
    if (n <= 0) throw ValidationError("need at least one rank");
    if (exponent < 0) throw ValidationError("negative power-law exponent");
    std::vector<double> mass(static_cast<std::size_t>(n));
    double norm = 0.0;
    for (int k = 1; k <= n; ++k) {
        mass[static_cast<std::size_t>(k - 1)] =
            1.0 / std::pow(static_cast<double>(k), exponent);
        norm += mass[static_cast<std::size_t>(k - 1)];
    }
    for (double& v : mass) v /= norm;
    return mass;
}

Workload generate_workload(const WorkloadConfig& cfg, const RegionCatalog& catalog) {
    if (cfg.horizon_hours <= 0) throw ValidationError("horizon must be positive");
    if (cfg.viewers_per_video < 0) throw ValidationError("negative viewer pool");
    for (int v : cfg.videos_per_hour)
        if (v < 0) throw ValidationError("negative arrival count in the profile");
    const int n = catalog.size();
    const auto broadcast_w = region_weights_or_default(cfg.broadcast_region_weights, n);
    const auto viewer_w = region_weights_or_default(cfg.viewer_region_weights, n);
    const std::vector<double> bq(cfg.broadcast_quality_weights.begin(),
                                 cfg.broadcast_quality_weights.end());
    std::vector<std::vector<double>> vq_by_region;
    if (cfg.viewer_quality_mix_by_region.empty()) {
        vq_by_region.assign(static_cast<std::size_t>(n),
                            {cfg.viewer_quality_weights.begin(),
                             cfg.viewer_quality_weights.end()});
    } else {
        if (static_cast<int>(cfg.viewer_quality_mix_by_region.size()) != n)
            throw ValidationError("per-region quality mix does not match the catalog");
        for (const auto& mix : cfg.viewer_quality_mix_by_region)
            vq_by_region.emplace_back(mix.begin(), mix.end());
    }

    std::mt19937_64 rng(cfg.seed);
    Workload out;
    out.reserve(static_cast<std::size_t>(cfg.horizon_hours));
    long long next_id = 0;
    for (int t = 0; t < cfg.horizon_hours; ++t) {
        SlotWorkload slot;
        slot.slot = t;
        const int arrivals = cfg.videos_per_hour[static_cast<std::size_t>(t % 24)];
        if (arrivals == 0) {
            out.push_back(std::move(slot));
            continue;
        }
        const auto masses = zipf_masses(arrivals, cfg.zipf_exponent);
        const double pool =
            static_cast<double>(arrivals) * cfg.viewers_per_video;
        for (int k = 0; k < arrivals; ++k) {
            VideoMeta video;
            char buf[32];
            std::snprintf(buf, sizeof buf, "v%06lld", next_id++);
            video.video_id = buf;
            video.slot = t;
            video.broadcast_region = categorical(rng, broadcast_w);
            video.original_quality = quality_at(categorical(rng, bq));
            DemandMatrix demand(n);
            const auto viewers =
                static_cast<Viewers>(std::llround(pool * masses[static_cast<std::size_t>(k)]));
            for (Viewers i = 0; i < viewers; ++i) {
                const int region = categorical(rng, viewer_w);
                const int qi =
                    std::min(categorical(rng, vq_by_region[static_cast<std::size_t>(region)]),
                             index_of(video.original_quality));
                demand.add(region, quality_at(qi), 1);
            }
            slot.videos.push_back(std::move(video));
            slot.demands.push_back(std::move(demand));
        }
        out.push_back(std::move(slot));
    }
    return out;
}

}  // namespace lvsim
