#pragma once
// Experiment orchestration: a flat key=value config, the offline solve +
// forecast phase, the online allocation phase over a (delay, dissatisfaction)
// grid, and CSV reports. Each pipeline stage reads its inputs from the output
// directory of the previous one, so staged runs and `all` produce identical
// bytes.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lvsim/allocator.hpp"
#include "lvsim/core.hpp"
#include "lvsim/csv.hpp"
#include "lvsim/forecast.hpp"
#include "lvsim/optimizer.hpp"
#include "lvsim/pricing.hpp"
#include "lvsim/workload.hpp"

namespace lvsim {

struct ConfigError : Error {
    using Error::Error;
};

// How next-slot reservations are produced for the evaluation day.
//   offline - the prediction available at the start of the previous slot
//             (its input window ends two slots back); the deployment timeline.
//   online  - window ends one slot back; a zero-lag upper bound.
//   oracle  - the true optimal counts of the slot itself.
enum class ForecastMode { offline, online, oracle };

enum class Algorithm { gnca, gca, gmc };
const std::string& algorithm_name(Algorithm a);

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";

    std::string workload_source = "generate";  // generate | file
    std::filesystem::path workload_file;       // long-form CSV when source=file
    WorkloadConfig workload;

    // Empty paths mean the built-in defaults.
    std::filesystem::path catalog_path;
    std::filesystem::path rtt_path;
    std::filesystem::path prices_path;

    std::int64_t node_limit = 4'000'000;

    std::vector<double> delay_grid{8.8, 120.0, 180.0};
    std::vector<double> diss_grid{0.0, 10.0};

    int epsilon = 24;  // forecaster input window, hours
    double train_fraction = 0.75;
    ForecastMode mode = ForecastMode::offline;
    int mlp_epochs = 300;
    double mlp_learning_rate = 0.01;
    int mlp_batch = 32;

    int test_hours = 24;  // evaluation day: the last test_hours slots
    Viewers od_limit = 500;
    bool literal_diss_guard = false;
    std::vector<Algorithm> algorithms{Algorithm::gnca, Algorithm::gca, Algorithm::gmc};

    void validate() const;  // throws ConfigError

    bool operator==(const ExperimentConfig&) const = default;
};

// `key = value` lines, '#' comments. Unknown keys are errors. `origin` names
// the source in error messages.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
ExperimentConfig parse_config_file(const std::filesystem::path& path);
// Round-trips through parse_config_text; written as config_used.txt.
std::string serialize_config(const ExperimentConfig& cfg);
// The full key reference, one "key: explanation" line each.
std::string config_reference();

struct Bundle {
    RegionCatalog catalog;
    RttMatrix rtt;
    PriceBook prices;
};

Bundle load_bundle(const ExperimentConfig& cfg);
Workload load_or_generate_workload(const ExperimentConfig& cfg, const Bundle& bundle,
                                   std::vector<std::string>* warnings = nullptr);

struct Phase1Result {
    double delay_ms = 0.0;
    std::vector<SlotSolution> solutions;
    std::vector<InstanceSeries> series;
};

Phase1Result run_phase1(const Bundle& bundle, const Workload& workload,
                        const OptimizerConfig& ocfg);

struct ForecastResult {
    std::vector<csv::ScoreRow> scores;        // every candidate, every region
    std::vector<std::string> selected;        // winning model name per region
    std::vector<std::unique_ptr<Forecaster>> models;  // fitted winner per region
};

ForecastResult fit_models(const ExperimentConfig& cfg,
                          const std::vector<InstanceSeries>& series);

// First slot of the evaluation day; also the earliest slot with enough
// history for the configured mode.
SlotIndex test_start_slot(const ExperimentConfig& cfg, std::size_t horizon);

// Reservations for every evaluation slot. `models` may be empty in oracle
// mode.
csv::ReservationTable build_reservations(const ExperimentConfig& cfg,
                                         const std::vector<InstanceSeries>& series,
                                         const std::vector<const Forecaster*>& models);

struct Phase2Result {
    double delay_ms = 0.0;
    double diss_pct = 0.0;
    // Keyed by algorithm name; metrics rows are in slot order.
    std::map<std::string, std::vector<csv::MetricsRow>> metrics;
    std::map<std::string, SlotOutcome> merged_outcomes;  // all slots concatenated
};

Phase2Result run_phase2(const ExperimentConfig& cfg, const Bundle& bundle,
                        const Workload& workload,
                        const csv::ReservationTable& reservations, double delay_ms,
                        double diss_pct);

// Output layout helpers.
std::filesystem::path phase1_dir(const ExperimentConfig& cfg, double delay_ms);
std::filesystem::path phase2_dir(const ExperimentConfig& cfg, double delay_ms,
                                 double diss_pct);

// Pipeline stages; each writes its artifacts under out_dir and reads what the
// earlier stages wrote there.
void stage_gen_workload(const ExperimentConfig& cfg);
void stage_optimize(const ExperimentConfig& cfg);
void stage_build_dataset(const ExperimentConfig& cfg);
void stage_forecast(const ExperimentConfig& cfg);
void stage_simulate(const ExperimentConfig& cfg);
void stage_report(const ExperimentConfig& cfg);
void stage_all(const ExperimentConfig& cfg);

}  // namespace lvsim
