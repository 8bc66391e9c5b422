#pragma once
// Core value types for geo-distributed livestream transcoding placement:
// the quality ladder, region/RTT data, per-video demand matrices and
// allocation plans, plus the structural plan checks shared by the offline
// optimizer and the online allocators.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lvsim {

using Viewers = std::int64_t;
using SlotIndex = int;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input or a plan that references data it should not.
struct ValidationError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Quality ladder
// ---------------------------------------------------------------------------

enum class Quality : int { q240 = 0, q360 = 1, q480 = 2, q720 = 3 };

inline constexpr int kQualityCount = 4;
inline constexpr std::array<Quality, kQualityCount> kAllQualities{
    Quality::q240, Quality::q360, Quality::q480, Quality::q720};
inline constexpr std::array<int, kQualityCount> kQualityHeights{240, 360, 480, 720};

constexpr int index_of(Quality q) { return static_cast<int>(q); }
Quality quality_at(int index);
int quality_height(Quality q);
const std::string& quality_label(Quality q);
Quality parse_quality(const std::string& label);

// ---------------------------------------------------------------------------
// Regions and round-trip delays
// ---------------------------------------------------------------------------

struct RegionInfo {
    int index = 0;
    std::string name;
    double lat = 0.0;
    double lon = 0.0;
};

// Square table of round-trip delays in milliseconds, indexed
// [serving region][viewer region]. The diagonal is the uniform local-serving
// floor and must be the minimum of every row.
class RttMatrix {
public:
    RttMatrix() = default;
    RttMatrix(int regions, double diagonal_ms);

    // Validates and adopts a full table; throws ValidationError on a
    // non-square table, negative delays, a non-uniform diagonal, or a row
    // whose diagonal is not its minimum.
    static RttMatrix from_rows(const std::vector<std::vector<double>>& rows);

    int regions() const { return n_; }
    double at(int serving, int viewer) const;
    void set(int serving, int viewer, double ms);
    double local_floor() const;  // the (uniform) diagonal value

    std::vector<std::string> validate() const;

private:
    int n_ = 0;
    std::vector<double> d_;
};

// ---------------------------------------------------------------------------
// Videos and demand
// ---------------------------------------------------------------------------

struct VideoMeta {
    std::string video_id;
    SlotIndex slot = 0;
    int broadcast_region = 0;
    Quality original_quality = Quality::q720;

    bool operator==(const VideoMeta&) const = default;
};

// Per-video viewer counts by (region, requested quality). The existence
// indicator for a pair is simply "count > 0"; it is never stored separately.
class DemandMatrix {
public:
    DemandMatrix() = default;
    explicit DemandMatrix(int regions);

    int regions() const { return static_cast<int>(counts_.size()); }
    void add(int region, Quality q, Viewers count);
    Viewers at(int region, Quality q) const;
    bool demanded(int region, Quality q) const { return at(region, q) > 0; }
    Viewers total_viewers() const;

    struct Entry {
        int region = 0;
        Quality quality = Quality::q240;
        Viewers viewers = 0;
    };
    // Demanded pairs in canonical order: region ascending, quality descending.
    std::vector<Entry> entries() const;

    // Checks the quality cap against the owning video: a demanded quality may
    // never exceed the broadcast quality.
    std::vector<std::string> validate_against(const VideoMeta& video) const;

    bool operator==(const DemandMatrix&) const = default;

private:
    std::vector<std::array<Viewers, kQualityCount>> counts_;
};

// ---------------------------------------------------------------------------
// Allocation plans
// ---------------------------------------------------------------------------

struct Placement {
    Quality quality = Quality::q240;
    int region = 0;
    auto operator<=>(const Placement&) const = default;
};

struct DemandKey {
    Quality quality = Quality::q240;
    int region = 0;  // viewer region
    auto operator<=>(const DemandKey&) const = default;
};

// Where each quality of one video is transcoded and which site serves each
// regional demand.
struct AllocationPlan {
    std::set<Placement> placements;
    std::map<DemandKey, int> assignments;  // demanded pair -> serving region

    bool operator==(const AllocationPlan&) const = default;
};

struct Violation {
    char constraint = '?';  // 'a'..'e'
    std::string detail;
};

// Structural checks for a plan: the forced original placement ('a'),
// assignments only to placed sites ('b'), assignments only for demanded
// pairs ('c'), exactly one serving site per demanded pair ('d'), and no
// placement above the broadcast quality ('e'). Returns an empty list iff the
// plan is well formed.
std::vector<Violation> validate_plan(const AllocationPlan& plan,
                                     const VideoMeta& video,
                                     const DemandMatrix& demand);

// Viewer-weighted mean round-trip delay over the plan's assignments, in
// milliseconds. A video with no viewers has latency 0 by definition. Throws
// ValidationError if an assignment references a pair with no demand.
double avg_latency(const AllocationPlan& plan, const DemandMatrix& demand,
                   const RttMatrix& rtt);

}  // namespace lvsim
