#pragma once
// Regional price book and the cost terms of a transcoding plan: instance
// rental, inter-region stream migration, and viewer-facing delivery. The
// same terms are reused by the reservation-phase accounting, where rental
// splits into discounted reserved instances and full-price on-demand ones.

#include <array>
#include <cstdint>
#include <vector>

#include "lvsim/core.hpp"

namespace lvsim {

// Per-region hourly and per-gigabyte rates, plus the per-quality stream size
// of one viewer-hour in gigabytes. All money values are dollars.
struct PriceBook {
    std::vector<double> zeta;   // on-demand instance, $/h
    std::vector<double> mu;     // reserved instance, $/h
    std::vector<double> eta;    // inter-region transfer, $/GB
    std::vector<double> omega;  // delivery to viewers, $/GB

    // Hourly stream volume per viewer at each quality, GB.
    std::array<double, kQualityCount> kappa_gb{0.405, 0.495, 0.603, 0.738};

    int regions() const { return static_cast<int>(zeta.size()); }
    double kappa(Quality q) const { return kappa_gb[index_of(q)]; }
    std::vector<std::string> validate() const;
};

// Hourly rental of every transcoding instance: one on-demand instance per
// placement, priced by its region.
double rental_cost(const std::vector<AllocationPlan>& plans, const PriceBook& prices);

// Transfer of each video's original stream from its broadcast region to every
// placement, including the placement in the broadcast region itself. The
// charged volume is that of the original quality regardless of the placed one.
double migration_cost(const std::vector<AllocationPlan>& plans,
                      const std::vector<VideoMeta>& videos, const PriceBook& prices);

// Delivery from each serving site to its viewers, priced by the serving
// region and sized by the requested quality.
double serving_cost(const std::vector<AllocationPlan>& plans,
                    const std::vector<DemandMatrix>& demands, const PriceBook& prices);

double total_cost(const std::vector<AllocationPlan>& plans,
                  const std::vector<VideoMeta>& videos,
                  const std::vector<DemandMatrix>& demands, const PriceBook& prices);

// Reservation-phase accounting: every reserved instance is paid for at its
// discounted rate whether used or not, on-demand instances at the full rate,
// and migration plus delivery follow the realized placements and servings.
double phase2_cost(const std::vector<Viewers>& reserved,
                   const std::vector<Viewers>& on_demand_used,
                   const std::vector<AllocationPlan>& plans,
                   const std::vector<VideoMeta>& videos,
                   const std::vector<DemandMatrix>& demands, const PriceBook& prices);

}  // namespace lvsim
