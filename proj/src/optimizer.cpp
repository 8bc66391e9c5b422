#include "lvsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lvsim {
namespace {

struct Dem {
    Quality q;
    int region = 0;
    Viewers p = 0;
};

// Feasibility is checked on the weighted delay sum rather than the mean so
// both solvers use the identical arithmetic. The epsilon scales with the
// budget to stay meaningful for large viewer counts.
bool within_budget(double weighted_sum, Viewers total, double threshold_ms) {
    const double budget = threshold_ms * static_cast<double>(total);
    return weighted_sum <= budget + 1e-9 * (1.0 + budget);
}

// Preference shared by search and exhaustive check: cheaper wins; within the
// cost tolerance fewer placements win, then the lexicographically smallest
// placement set, then the smallest assignment map.
bool plan_better(double cost_a, const AllocationPlan& a, double cost_b,
                 const AllocationPlan& b, double tol) {
    if (cost_a < cost_b - tol) return true;
    if (cost_b < cost_a - tol) return false;
    if (a.placements.size() != b.placements.size())
        return a.placements.size() < b.placements.size();
    if (a.placements != b.placements) return a.placements < b.placements;
    return a.assignments < b.assignments;
}

struct Problem {
    const VideoMeta* video;
    const RttMatrix* rtt;
    const PriceBook* prices;
    int n = 0;
    Quality qb = Quality::q720;
    int rb = 0;
    double base_cost = 0.0;  // the forced original placement
    Viewers total = 0;
    std::vector<Dem> dems;
    // per demand x region
    std::vector<std::vector<double>> serve;   // delivery cost of the demand at a site
    std::vector<std::vector<double>> weight;  // viewers * delay at a site

    // Extra cost of opening (q, r); zero for the forced original placement.
    double open_cost(Quality q, int r) const {
        if (q == qb && r == rb) return 0.0;
        return prices->zeta[static_cast<std::size_t>(r)] +
               prices->eta[static_cast<std::size_t>(video->broadcast_region)] *
                   prices->kappa(qb);
    }
};

Problem make_problem(const VideoMeta& video, const DemandMatrix& demand,
                     const RttMatrix& rtt, const PriceBook& prices) {
    if (demand.regions() != rtt.regions() || rtt.regions() != prices.regions())
        throw ValidationError("region counts of demand, rtt and prices disagree");
    {
        auto bad = demand.validate_against(video);
        if (!bad.empty()) throw ValidationError(bad.front());
    }
    if (video.broadcast_region < 0 || video.broadcast_region >= rtt.regions())
        throw ValidationError("broadcast region out of range for video " + video.video_id);

    Problem pb;
    pb.video = &video;
    pb.rtt = &rtt;
    pb.prices = &prices;
    pb.n = rtt.regions();
    pb.qb = video.original_quality;
    pb.rb = video.broadcast_region;
    pb.base_cost = prices.zeta[static_cast<std::size_t>(pb.rb)] +
                   prices.eta[static_cast<std::size_t>(pb.rb)] * prices.kappa(pb.qb);
    pb.total = demand.total_viewers();
    for (const auto& e : demand.entries()) pb.dems.push_back({e.quality, e.region, e.viewers});

    pb.serve.resize(pb.dems.size());
    pb.weight.resize(pb.dems.size());
    for (std::size_t i = 0; i < pb.dems.size(); ++i) {
        pb.serve[i].resize(static_cast<std::size_t>(pb.n));
        pb.weight[i].resize(static_cast<std::size_t>(pb.n));
        for (int s = 0; s < pb.n; ++s) {
            pb.serve[i][static_cast<std::size_t>(s)] =
                prices.omega[static_cast<std::size_t>(s)] * prices.kappa(pb.dems[i].q) *
                static_cast<double>(pb.dems[i].p);
            pb.weight[i][static_cast<std::size_t>(s)] =
                static_cast<double>(pb.dems[i].p) * rtt.at(s, pb.dems[i].region);
        }
    }
    return pb;
}

AllocationPlan plan_from_choices(const Problem& pb, const std::vector<int>& choice) {
    AllocationPlan plan;
    plan.placements.insert({pb.qb, pb.rb});
    for (std::size_t i = 0; i < pb.dems.size(); ++i) {
        plan.placements.insert({pb.dems[i].q, choice[i]});
        plan.assignments[{pb.dems[i].q, pb.dems[i].region}] = choice[i];
    }
    return plan;
}

double cost_of_choices(const Problem& pb, const std::vector<int>& choice) {
    double cost = pb.base_cost;
    std::set<Placement> opened{{pb.qb, pb.rb}};
    for (std::size_t i = 0; i < pb.dems.size(); ++i) {
        if (opened.insert({pb.dems[i].q, choice[i]}).second)
            cost += pb.open_cost(pb.dems[i].q, choice[i]);
        cost += pb.serve[i][static_cast<std::size_t>(choice[i])];
    }
    return cost;
}

double weight_of_choices(const Problem& pb, const std::vector<int>& choice) {
    double w = 0.0;
    for (std::size_t i = 0; i < pb.dems.size(); ++i)
        w += pb.weight[i][static_cast<std::size_t>(choice[i])];
    return w;
}

// Without the delay constraint every quality is cheapest at a single site:
// delivery cost does not depend on the viewer region, so all demands of one
// quality share whichever open site has the lowest delivery rate. This gives
// the true unconstrained optimum, used as a shortcut when it happens to meet
// the delay budget anyway.
struct FreeOptimum {
    std::vector<int> choice;  // per demand
    double cost = 0.0;
};

FreeOptimum latency_free_optimum(const Problem& pb) {
    FreeOptimum out;
    out.choice.assign(pb.dems.size(), -1);
    out.cost = pb.base_cost;

    std::array<std::vector<std::size_t>, kQualityCount> by_quality;
    for (std::size_t i = 0; i < pb.dems.size(); ++i)
        by_quality[index_of(pb.dems[i].q)].push_back(i);

    for (int qi = 0; qi < kQualityCount; ++qi) {
        const auto& group = by_quality[qi];
        if (group.empty()) continue;
        const Quality q = quality_at(qi);
        double volume = 0.0;  // total delivered gigabytes of this quality
        for (std::size_t i : group)
            volume += pb.prices->kappa(q) * static_cast<double>(pb.dems[i].p);

        const bool forced = (q == pb.qb);
        const double omega_rb = pb.prices->omega[static_cast<std::size_t>(pb.rb)];
        int best_site = -1;
        double best_cost = std::numeric_limits<double>::infinity();
        int best_count = 0;
        for (int s = 0; s < pb.n; ++s) {
            double c;
            int count;
            if (forced && s == pb.rb) {
                c = omega_rb * volume;
                count = 0;  // no extra placement
            } else {
                const double rate = forced
                                        ? std::min(pb.prices->omega[static_cast<std::size_t>(s)],
                                                   omega_rb)
                                        : pb.prices->omega[static_cast<std::size_t>(s)];
                c = pb.open_cost(q, s) + rate * volume;
                count = 1;
            }
            if (c < best_cost - 1e-12 ||
                (c < best_cost + 1e-12 && count < best_count)) {
                best_cost = c;
                best_site = s;
                best_count = count;
            }
        }
        // When an extra site beats the forced one it is because its delivery
        // rate is strictly lower, so it is also the serving site.
        for (std::size_t i : group) out.choice[i] = best_site;
        out.cost += best_cost;
    }
    return out;
}

VideoSolve solve_empty(const Problem& pb) {
    VideoSolve out;
    out.plan.placements.insert({pb.qb, pb.rb});
    out.cost = pb.base_cost;
    out.avg_latency_ms = 0.0;
    return out;
}

}  // namespace

VideoSolve solve_video(const VideoMeta& video, const DemandMatrix& demand,
                       const RttMatrix& rtt, const PriceBook& prices,
                       const OptimizerConfig& cfg) {
    Problem pb = make_problem(video, demand, rtt, prices);
    if (pb.dems.empty()) return solve_empty(pb);
    if (pb.n > 62) throw ValidationError("too many regions for the search bitmasks");

    const std::size_t m = pb.dems.size();
    const double D = cfg.delay_threshold_ms;

    // Most-relaxed serving: every demand at its lowest-weight site.
    std::vector<int> min_w_site(m);
    double min_w_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        int best = 0;
        for (int s = 1; s < pb.n; ++s)
            if (pb.weight[i][static_cast<std::size_t>(s)] <
                pb.weight[i][static_cast<std::size_t>(best)] - 1e-15)
                best = s;
        min_w_site[i] = best;
        min_w_sum += pb.weight[i][static_cast<std::size_t>(best)];
    }
    if (!within_budget(min_w_sum, pb.total, D))
        throw InfeasibleError("video " + video.video_id +
                              ": delay threshold unreachable even with all-nearest serving");

    // Shortcut: the unconstrained optimum, if it meets the budget, is the answer.
    FreeOptimum free = latency_free_optimum(pb);
    if (within_budget(weight_of_choices(pb, free.choice), pb.total, D)) {
        VideoSolve out;
        out.plan = plan_from_choices(pb, free.choice);
        out.cost = cost_of_choices(pb, free.choice);
        out.avg_latency_ms =
            weight_of_choices(pb, free.choice) / static_cast<double>(pb.total);
        return out;
    }

    // Branch and bound over per-demand serving choices, placements induced.
    // Demands are explored largest first so the delay budget binds early.
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pb.dems[a].p != pb.dems[b].p) return pb.dems[a].p > pb.dems[b].p;
        if (pb.dems[a].q != pb.dems[b].q)
            return index_of(pb.dems[a].q) > index_of(pb.dems[b].q);
        return pb.dems[a].region < pb.dems[b].region;
    });

    std::vector<double> suffix_min_w(m + 1, 0.0), suffix_min_serve(m + 1, 0.0);
    std::vector<unsigned> suffix_qmask(m + 1, 0);
    for (std::size_t k = m; k-- > 0;) {
        const std::size_t i = order[k];
        double mw = std::numeric_limits<double>::infinity();
        double ms = std::numeric_limits<double>::infinity();
        for (int s = 0; s < pb.n; ++s) {
            mw = std::min(mw, pb.weight[i][static_cast<std::size_t>(s)]);
            ms = std::min(ms, pb.serve[i][static_cast<std::size_t>(s)]);
        }
        suffix_min_w[k] = suffix_min_w[k + 1] + mw;
        suffix_min_serve[k] = suffix_min_serve[k + 1] + ms;
        suffix_qmask[k] =
            suffix_qmask[k + 1] | (1u << static_cast<unsigned>(index_of(pb.dems[i].q)));
    }

    std::array<double, kQualityCount> min_open{};
    for (int qi = 0; qi < kQualityCount; ++qi) {
        double mo = std::numeric_limits<double>::infinity();
        for (int s = 0; s < pb.n; ++s) mo = std::min(mo, pb.open_cost(quality_at(qi), s));
        min_open[static_cast<std::size_t>(qi)] = mo;
    }

    // Incumbent: the all-nearest assignment, feasible by the check above.
    std::vector<int> best_choice = min_w_site;
    AllocationPlan best_plan = plan_from_choices(pb, best_choice);
    double best_cost = cost_of_choices(pb, best_choice);

    std::array<std::uint64_t, kQualityCount> opened{};
    opened[static_cast<std::size_t>(index_of(pb.qb))] = 1ull << pb.rb;
    std::vector<int> choice(m, -1);
    std::int64_t nodes = 0;
    bool out_of_budget = false;

    struct Option {
        double marginal;
        int site;
    };
    std::vector<std::vector<Option>> option_stack(m);

    auto dfs = [&](auto&& self, std::size_t k, double cost, double wsum) -> void {
        if (out_of_budget) return;
        if (k == m) {
            if (cost > best_cost + cfg.tolerance) return;
            AllocationPlan candidate = plan_from_choices(pb, choice);
            if (plan_better(cost, candidate, best_cost, best_plan, cfg.tolerance)) {
                best_cost = cost;
                best_plan = std::move(candidate);
                best_choice = choice;
            }
            return;
        }
        const std::size_t i = order[k];
        const int qi = index_of(pb.dems[i].q);
        auto& opts = option_stack[k];
        opts.clear();
        for (int s = 0; s < pb.n; ++s) {
            if (!within_budget(wsum + pb.weight[i][static_cast<std::size_t>(s)] +
                                   suffix_min_w[k + 1],
                               pb.total, D))
                continue;
            const bool is_open = (opened[static_cast<std::size_t>(qi)] >> s) & 1ull;
            opts.push_back({pb.serve[i][static_cast<std::size_t>(s)] +
                                (is_open ? 0.0 : pb.open_cost(pb.dems[i].q, s)),
                            s});
        }
        std::sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) {
            if (a.marginal != b.marginal) return a.marginal < b.marginal;
            return a.site < b.site;
        });
        for (const auto& opt : opts) {
            if (out_of_budget) return;
            const bool was_open = (opened[static_cast<std::size_t>(qi)] >> opt.site) & 1ull;
            double lb = cost + opt.marginal + suffix_min_serve[k + 1];
            for (int qq = 0; qq < kQualityCount; ++qq) {
                if (!(suffix_qmask[k + 1] & (1u << static_cast<unsigned>(qq)))) continue;
                std::uint64_t mask = opened[static_cast<std::size_t>(qq)];
                if (qq == qi) mask |= 1ull << opt.site;
                if (mask == 0) lb += min_open[static_cast<std::size_t>(qq)];
            }
            if (lb > best_cost + cfg.tolerance) continue;
            if (++nodes > cfg.node_limit) {
                out_of_budget = true;
                return;
            }
            choice[i] = opt.site;
            opened[static_cast<std::size_t>(qi)] |= 1ull << opt.site;
            self(self, k + 1, cost + opt.marginal,
                 wsum + pb.weight[i][static_cast<std::size_t>(opt.site)]);
            if (!was_open)
                opened[static_cast<std::size_t>(qi)] &= ~(1ull << opt.site);
            choice[i] = -1;
        }
    };
    dfs(dfs, 0, pb.base_cost, 0.0);

    VideoSolve out;
    out.plan = std::move(best_plan);
    out.cost = best_cost;
    out.avg_latency_ms = weight_of_choices(pb, best_choice) / static_cast<double>(pb.total);
    out.node_limit_hit = out_of_budget;
    return out;
}

VideoSolve brute_force_video(const VideoMeta& video, const DemandMatrix& demand,
                             const RttMatrix& rtt, const PriceBook& prices,
                             const OptimizerConfig& cfg) {
    Problem pb = make_problem(video, demand, rtt, prices);
    if (pb.dems.empty()) return solve_empty(pb);

    const std::size_t m = pb.dems.size();
    const double D = cfg.delay_threshold_ms;

    double min_w_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double mw = std::numeric_limits<double>::infinity();
        for (int s = 0; s < pb.n; ++s)
            mw = std::min(mw, pb.weight[i][static_cast<std::size_t>(s)]);
        min_w_sum += mw;
    }
    if (!within_budget(min_w_sum, pb.total, D))
        throw InfeasibleError("video " + video.video_id +
                              ": delay threshold unreachable even with all-nearest serving");

    // Candidate placements: every demanded quality at every region, the
    // forced original placement always present.
    std::vector<Placement> candidates;
    {
        std::array<bool, kQualityCount> seen{};
        for (const auto& d : pb.dems) seen[static_cast<std::size_t>(index_of(d.q))] = true;
        for (int qi = 0; qi < kQualityCount; ++qi) {
            if (!seen[static_cast<std::size_t>(qi)]) continue;
            for (int r = 0; r < pb.n; ++r) {
                if (quality_at(qi) == pb.qb && r == pb.rb) continue;
                candidates.push_back({quality_at(qi), r});
            }
        }
    }
    if (candidates.size() > 22)
        throw ExplosionGuardError("exhaustive check limited to 22 optional placements, got " +
                                  std::to_string(candidates.size()));

    const std::uint64_t mask_count = 1ull << candidates.size();
    std::int64_t combos_evaluated = 0;
    constexpr std::int64_t kComboCap = 20'000'000;

    bool have_best = false;
    AllocationPlan best_plan;
    double best_cost = 0.0;
    double best_weight = 0.0;

    std::vector<VideoMeta> one_video{video};
    std::vector<DemandMatrix> one_demand{demand};

    for (std::uint64_t mask = 0; mask < mask_count; ++mask) {
        std::set<Placement> placements{{pb.qb, pb.rb}};
        for (std::size_t c = 0; c < candidates.size(); ++c)
            if ((mask >> c) & 1ull) placements.insert(candidates[c]);

        std::vector<std::vector<int>> options(m);
        bool coverable = true;
        for (std::size_t i = 0; i < m && coverable; ++i) {
            for (const auto& p : placements)
                if (p.quality == pb.dems[i].q) options[i].push_back(p.region);
            if (options[i].empty()) coverable = false;
        }
        if (!coverable) continue;

        std::vector<std::size_t> pick(m, 0);
        while (true) {
            if (++combos_evaluated > kComboCap)
                throw ExplosionGuardError("exhaustive check exceeded the combination cap");
            AllocationPlan plan;
            plan.placements = placements;
            double wsum = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const int s = options[i][pick[i]];
                plan.assignments[{pb.dems[i].q, pb.dems[i].region}] = s;
                wsum += pb.weight[i][static_cast<std::size_t>(s)];
            }
            if (within_budget(wsum, pb.total, D)) {
                std::vector<AllocationPlan> one_plan{plan};
                const double cost = total_cost(one_plan, one_video, one_demand, prices);
                if (!have_best ||
                    plan_better(cost, plan, best_cost, best_plan, cfg.tolerance)) {
                    have_best = true;
                    best_plan = plan;
                    best_cost = cost;
                    best_weight = wsum;
                }
            }
            // odometer step
            std::size_t i = 0;
            while (i < m && ++pick[i] == options[i].size()) {
                pick[i] = 0;
                ++i;
            }
            if (i == m) break;
        }
    }

    if (!have_best)
        throw InfeasibleError("video " + video.video_id + ": no feasible plan found");
    VideoSolve out;
    out.plan = std::move(best_plan);
    out.cost = best_cost;
    out.avg_latency_ms = best_weight / static_cast<double>(pb.total);
    return out;
}

SlotSolution solve_slot(SlotIndex slot, const std::vector<VideoMeta>& videos,
                        const std::vector<DemandMatrix>& demands, const RttMatrix& rtt,
                        const PriceBook& prices, const OptimizerConfig& cfg) {
    if (videos.size() != demands.size())
        throw ValidationError("video/demand count mismatch in slot " + std::to_string(slot));
    SlotSolution out;
    out.slot = slot;
    out.instance_counts.assign(static_cast<std::size_t>(rtt.regions()), 0);
    for (std::size_t v = 0; v < videos.size(); ++v) {
        VideoSolve s;
        try {
            s = solve_video(videos[v], demands[v], rtt, prices, cfg);
        } catch (const InfeasibleError& e) {
            throw InfeasibleError("slot " + std::to_string(slot) + ": " + e.what());
        }
        out.objective += s.cost;
        out.per_video_latency.push_back(s.avg_latency_ms);
        out.node_limit_hit = out.node_limit_hit || s.node_limit_hit;
        for (const auto& p : s.plan.placements)
            out.instance_counts[static_cast<std::size_t>(p.region)] += 1;
        out.plans.push_back(std::move(s.plan));
    }
    return out;
}

std::vector<InstanceSeries> aggregate_instance_counts(
    const std::vector<SlotSolution>& solutions, int regions) {
    std::vector<std::size_t> order(solutions.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return solutions[a].slot < solutions[b].slot;
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
        const SlotIndex prev = solutions[order[k - 1]].slot;
        const SlotIndex cur = solutions[order[k]].slot;
        if (cur == prev)
            throw GapInHorizonError("slot " + std::to_string(cur) + " appears twice");
        if (cur != prev + 1)
            throw GapInHorizonError("missing slot " + std::to_string(prev + 1));
    }
    std::vector<InstanceSeries> series(static_cast<std::size_t>(regions));
    for (int r = 0; r < regions; ++r) {
        series[static_cast<std::size_t>(r)].region = r;
        series[static_cast<std::size_t>(r)].counts.reserve(solutions.size());
    }
    for (std::size_t k : order) {
        const auto& counts = solutions[k].instance_counts;
        if (static_cast<int>(counts.size()) != regions)
            throw ValidationError("instance count vector has wrong region count");
        for (int r = 0; r < regions; ++r)
            series[static_cast<std::size_t>(r)].counts.push_back(
                counts[static_cast<std::size_t>(r)]);
    }
    return series;
}

}  // namespace lvsim
