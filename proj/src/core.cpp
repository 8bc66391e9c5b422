#include "lvsim/core.hpp"

#include <cmath>
#include <sstream>

namespace lvsim {

namespace {

const std::array<std::string, kQualityCount> kLabels{"240p", "360p", "480p", "720p"};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

Quality quality_at(int index) {
    if (index < 0 || index >= kQualityCount)
        throw ValidationError("quality index out of range: " + std::to_string(index));
    return static_cast<Quality>(index);
}

int quality_height(Quality q) { return kQualityHeights[index_of(q)]; }

const std::string& quality_label(Quality q) { return kLabels[index_of(q)]; }

Quality parse_quality(const std::string& label) {
    for (int i = 0; i < kQualityCount; ++i)
        if (kLabels[i] == label) return static_cast<Quality>(i);
    throw ValidationError("unknown quality label: " + label);
}

// ---------------------------------------------------------------------------
// RttMatrix
// ---------------------------------------------------------------------------

RttMatrix::RttMatrix(int regions, double diagonal_ms) : n_(regions) {
    if (regions <= 0) throw ValidationError("rtt matrix needs at least one region");
    if (diagonal_ms < 0) throw ValidationError("negative local delay");
    d_.assign(static_cast<std::size_t>(n_) * n_, diagonal_ms);
}

RttMatrix RttMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) throw ValidationError("empty rtt table");
    RttMatrix m(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n)
            throw ValidationError("rtt table is not square at row " + std::to_string(i));
        for (int j = 0; j < n; ++j) m.set(i, j, rows[i][j]);
    }
    auto problems = m.validate();
    if (!problems.empty()) throw ValidationError("bad rtt table: " + problems.front());
    return m;
}

double RttMatrix::at(int serving, int viewer) const {
    if (serving < 0 || serving >= n_ || viewer < 0 || viewer >= n_)
        throw ValidationError("rtt index out of range");
    return d_[static_cast<std::size_t>(serving) * n_ + viewer];
}

void RttMatrix::set(int serving, int viewer, double ms) {
    if (serving < 0 || serving >= n_ || viewer < 0 || viewer >= n_)
        throw ValidationError("rtt index out of range");
    d_[static_cast<std::size_t>(serving) * n_ + viewer] = ms;
}

double RttMatrix::local_floor() const {
    if (n_ == 0) throw ValidationError("empty rtt matrix");
    return at(0, 0);
}

std::vector<std::string> RttMatrix::validate() const {
    std::vector<std::string> out;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (at(i, j) < 0)
                out.push_back("negative delay at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
    for (int i = 1; i < n_; ++i)
        if (std::abs(at(i, i) - at(0, 0)) > 1e-9)
            out.push_back("diagonal not uniform at region " + std::to_string(i) +
                          ": " + fmt(at(i, i)) + " vs " + fmt(at(0, 0)));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            if (at(i, j) < at(i, i) - 1e-12)
                out.push_back("row " + std::to_string(i) +
                              " beats its local delay at column " + std::to_string(j));
    return out;
}

// ---------------------------------------------------------------------------
// DemandMatrix
// ---------------------------------------------------------------------------

DemandMatrix::DemandMatrix(int regions) {
    if (regions <= 0) throw ValidationError("demand matrix needs at least one region");
    counts_.assign(static_cast<std::size_t>(regions), {0, 0, 0, 0});
}

void DemandMatrix::add(int region, Quality q, Viewers count) {
    if (region < 0 || region >= regions())
        throw ValidationError("demand region out of range: " + std::to_string(region));
    if (count < 0) throw ValidationError("negative viewer count");
    counts_[static_cast<std::size_t>(region)][index_of(q)] += count;
}

Viewers DemandMatrix::at(int region, Quality q) const {
    if (region < 0 || region >= regions())
        throw ValidationError("demand region out of range: " + std::to_string(region));
    return counts_[static_cast<std::size_t>(region)][index_of(q)];
}

Viewers DemandMatrix::total_viewers() const {
    Viewers total = 0;
    for (const auto& row : counts_)
        for (Viewers c : row) total += c;
    return total;
}

std::vector<DemandMatrix::Entry> DemandMatrix::entries() const {
    std::vector<Entry> out;
    for (int r = 0; r < regions(); ++r)
        for (int qi = kQualityCount - 1; qi >= 0; --qi)
            if (counts_[static_cast<std::size_t>(r)][qi] > 0)
                out.push_back({r, static_cast<Quality>(qi),
                               counts_[static_cast<std::size_t>(r)][qi]});
    return out;
}

std::vector<std::string> DemandMatrix::validate_against(const VideoMeta& video) const {
    std::vector<std::string> out;
    for (int r = 0; r < regions(); ++r)
        for (int qi = 0; qi < kQualityCount; ++qi)
            if (counts_[static_cast<std::size_t>(r)][qi] > 0 &&
                qi > index_of(video.original_quality))
                out.push_back("video " + video.video_id + ": demand for " +
                              kLabels[qi] + " in region " + std::to_string(r) +
                              " exceeds broadcast quality " +
                              quality_label(video.original_quality));
    return out;
}

// ---------------------------------------------------------------------------
// Plan checks
// ---------------------------------------------------------------------------

std::vector<Violation> validate_plan(const AllocationPlan& plan,
                                     const VideoMeta& video,
                                     const DemandMatrix& demand) {
    std::vector<Violation> out;
    const Placement origin{video.original_quality, video.broadcast_region};
    if (!plan.placements.count(origin))
        out.push_back({'a', "missing original placement of " +
                                quality_label(origin.quality) + " in region " +
                                std::to_string(origin.region)});
    for (const auto& [key, serving] : plan.assignments) {
        if (!plan.placements.count(Placement{key.quality, serving}))
            out.push_back({'b', "pair (" + quality_label(key.quality) + ", region " +
                                    std::to_string(key.region) +
                                    ") assigned to unplaced site " +
                                    std::to_string(serving)});
        if (demand.at(key.region, key.quality) == 0)
            out.push_back({'c', "assignment for undemanded pair (" +
                                    quality_label(key.quality) + ", region " +
                                    std::to_string(key.region) + ")"});
    }
    for (const auto& e : demand.entries())
        if (!plan.assignments.count(DemandKey{e.quality, e.region}))
            out.push_back({'d', "demanded pair (" + quality_label(e.quality) +
                                    ", region " + std::to_string(e.region) +
                                    ") has no serving site"});
    for (const auto& p : plan.placements)
        if (index_of(p.quality) > index_of(video.original_quality))
            out.push_back({'e', "placement of " + quality_label(p.quality) +
                                    " above broadcast quality " +
                                    quality_label(video.original_quality)});
    return out;
}

double avg_latency(const AllocationPlan& plan, const DemandMatrix& demand,
                   const RttMatrix& rtt) {
    const Viewers total = demand.total_viewers();
    if (total == 0) return 0.0;
    double weighted = 0.0;
    for (const auto& [key, serving] : plan.assignments) {
        const Viewers p = demand.at(key.region, key.quality);
        if (p == 0)
            throw ValidationError("assignment references pair with no viewers");
        weighted += static_cast<double>(p) * rtt.at(serving, key.region);
    }
    return weighted / static_cast<double>(total);
}

}  // namespace lvsim
