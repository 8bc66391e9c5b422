#include "lvsim/pricing.hpp"

namespace lvsim {

std::vector<std::string> PriceBook::validate() const {
    std::vector<std::string> out;
    const std::size_t n = zeta.size();
    if (n == 0) out.push_back("price book covers no regions");
    if (mu.size() != n || eta.size() != n || omega.size() != n)
        out.push_back("price vectors differ in length");
    auto nonneg = [&](const std::vector<double>& v, const char* name) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i] < 0)
                out.push_back(std::string(name) + " negative in region " + std::to_string(i));
    };
    nonneg(zeta, "zeta");
    nonneg(mu, "mu");
    nonneg(eta, "eta");
    nonneg(omega, "omega");
    for (std::size_t i = 0; i < n && i < mu.size(); ++i)
        if (mu[i] > zeta[i] + 1e-12)
            out.push_back("reserved rate above on-demand rate in region " + std::to_string(i));
    for (double k : kappa_gb)
        if (k <= 0) out.push_back("non-positive stream volume");
    return out;
}

double rental_cost(const std::vector<AllocationPlan>& plans, const PriceBook& prices) {
    double cost = 0.0;
    for (const auto& plan : plans)
        for (const auto& p : plan.placements) cost += prices.zeta.at(p.region);
    return cost;
}

double migration_cost(const std::vector<AllocationPlan>& plans,
                      const std::vector<VideoMeta>& videos, const PriceBook& prices) {
    if (plans.size() != videos.size())
        throw ValidationError("plan/video count mismatch");
    double cost = 0.0;
    for (std::size_t v = 0; v < plans.size(); ++v) {
        const double per_placement = prices.eta.at(videos[v].broadcast_region) *
                                     prices.kappa(videos[v].original_quality);
        cost += per_placement * static_cast<double>(plans[v].placements.size());
    }
    return cost;
}

double serving_cost(const std::vector<AllocationPlan>& plans,
                    const std::vector<DemandMatrix>& demands, const PriceBook& prices) {
    if (plans.size() != demands.size())
        throw ValidationError("plan/demand count mismatch");
    double cost = 0.0;
    for (std::size_t v = 0; v < plans.size(); ++v)
        for (const auto& [key, serving] : plans[v].assignments)
            cost += prices.omega.at(serving) * prices.kappa(key.quality) *
                    static_cast<double>(demands[v].at(key.region, key.quality));
    return cost;
}

double total_cost(const std::vector<AllocationPlan>& plans,
                  const std::vector<VideoMeta>& videos,
                  const std::vector<DemandMatrix>& demands, const PriceBook& prices) {
    return rental_cost(plans, prices) + migration_cost(plans, videos, prices) +
           serving_cost(plans, demands, prices);
}

double phase2_cost(const std::vector<Viewers>& reserved,
                   const std::vector<Viewers>& on_demand_used,
                   const std::vector<AllocationPlan>& plans,
                   const std::vector<VideoMeta>& videos,
                   const std::vector<DemandMatrix>& demands, const PriceBook& prices) {
    if (static_cast<int>(reserved.size()) != prices.regions() ||
        static_cast<int>(on_demand_used.size()) != prices.regions())
        throw ValidationError("instance count vectors do not match region count");
    double cost = 0.0;
    for (int r = 0; r < prices.regions(); ++r) {
        if (reserved[r] < 0 || on_demand_used[r] < 0)
            throw ValidationError("negative instance count");
        cost += prices.mu[r] * static_cast<double>(reserved[r]);
        cost += prices.zeta[r] * static_cast<double>(on_demand_used[r]);
    }
    return cost + migration_cost(plans, videos, prices) +
           serving_cost(plans, demands, prices);
}

}  // namespace lvsim
