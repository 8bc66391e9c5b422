#pragma once
// CSV readers and writers for every artifact the pipeline exchanges: region
// catalogs, delay tables, price books, workloads (long form and raw viewer
// traces), instance-count series, reservation tables, model scores, per-slot
// plan and outcome dumps, and hourly metrics. Every file carries a header
// row; regions appear by name. Parse errors carry "path:line:".

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "lvsim/allocator.hpp"
#include "lvsim/core.hpp"
#include "lvsim/forecast.hpp"
#include "lvsim/optimizer.hpp"
#include "lvsim/pricing.hpp"
#include "lvsim/workload.hpp"

namespace lvsim::csv {

struct CsvError : Error {
    using Error::Error;
};

// Up to ten significant digits; round-trips every value the toolkit writes.
std::string format_double(double v);
std::vector<std::string> split_line(const std::string& line);

// region,name,lat,lon
void write_catalog(const std::filesystem::path& path, const RegionCatalog& catalog);
RegionCatalog read_catalog(const std::filesystem::path& path);

// Square table with a header row and leading column of region names; rows
// are serving regions. Read rows may be permuted relative to the catalog.
void write_rtt(const std::filesystem::path& path, const RegionCatalog& catalog,
               const RttMatrix& rtt);
RttMatrix read_rtt(const std::filesystem::path& path, const RegionCatalog& catalog);

// region,zeta,mu,eta,omega
void write_price_book(const std::filesystem::path& path, const RegionCatalog& catalog,
                      const PriceBook& prices);
PriceBook read_price_book(const std::filesystem::path& path,
                          const RegionCatalog& catalog);

// video_id,slot,broadcast_region,original_quality,viewer_region,
// requested_quality,viewers  (one row per demanded pair; a video with no
// viewers keeps one row with the viewer fields empty)
void write_workload(const std::filesystem::path& path, const RegionCatalog& catalog,
                    const Workload& workload);
// Requested qualities above the broadcast quality are clamped down; each
// clamp appends a note to `warnings` when given.
Workload read_workload(const std::filesystem::path& path, const RegionCatalog& catalog,
                       std::vector<std::string>* warnings = nullptr);

// video_id,created_unix,broadcaster_lat,broadcaster_lon,width,height,
// viewer_lat,viewer_lon,viewer_height,viewers
// Videos are bucketed into hourly slots starting at the earliest creation
// hour; coordinates map to their nearest catalog region and heights to the
// nearest rendition class.
Workload read_raw_trace(const std::filesystem::path& path, const RegionCatalog& catalog,
                        std::vector<std::string>* warnings = nullptr);

// slot,region,count
void write_series(const std::filesystem::path& path, const RegionCatalog& catalog,
                  const std::vector<InstanceSeries>& series);
std::vector<InstanceSeries> read_series(const std::filesystem::path& path,
                                        const RegionCatalog& catalog);

// slot,region,instance_count
void write_slot_counts(const std::filesystem::path& path, const RegionCatalog& catalog,
                       const std::vector<SlotSolution>& solutions);

// slot,region,reserved
using ReservationTable = std::map<SlotIndex, std::vector<Viewers>>;
void write_reservations(const std::filesystem::path& path, const RegionCatalog& catalog,
                        const ReservationTable& table);
ReservationTable read_reservations(const std::filesystem::path& path,
                                   const RegionCatalog& catalog);

// region,model,r2,mae  (candidates that failed to train keep their name and
// leave the numeric fields empty)
struct ScoreRow {
    int region = 0;
    ModelScore score;
};
void write_scores(const std::filesystem::path& path, const RegionCatalog& catalog,
                  const std::vector<ScoreRow>& rows);

// video_id,quality,transcode_region and
// video_id,quality,viewer_region,serving_region for one solved slot.
void write_plan_placements(const std::filesystem::path& path,
                           const RegionCatalog& catalog,
                           const std::vector<VideoMeta>& videos,
                           const std::vector<AllocationPlan>& plans);
void write_plan_assignments(const std::filesystem::path& path,
                            const RegionCatalog& catalog,
                            const std::vector<VideoMeta>& videos,
                            const std::vector<AllocationPlan>& plans);
std::map<std::string, AllocationPlan> read_plans(
    const std::filesystem::path& placements_path,
    const std::filesystem::path& assignments_path, const RegionCatalog& catalog);

// video_id,quality,region,kind and
// video_id,quality,viewer_region,serving_region,satisfied
void write_outcome_placements(const std::filesystem::path& path,
                              const RegionCatalog& catalog, const SlotOutcome& outcome);
void write_outcome_served(const std::filesystem::path& path,
                          const RegionCatalog& catalog, const SlotOutcome& outcome);

// slot,algorithm,total_cost,avg_latency_ms,hit_pct,on_demand_pct,diss_pct,
// unserved. Reading restores exactly those fields; the viewer totals backing
// the percentages are not part of the file.
struct MetricsRow {
    SlotIndex slot = 0;
    std::string algorithm;
    SlotMetrics metrics;
};
void write_metrics(const std::filesystem::path& path,
                   const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

}  // namespace lvsim::csv
