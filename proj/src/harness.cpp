#include "lvsim/harness.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lvsim {
namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Parse context for one config line; all converters fail with file:line.
struct Ctx {
    const std::string& origin;
    int line;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
    }

    double number(const std::string& v) const {
        std::size_t used = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &used);
        } catch (const std::exception&) {
            fail("not a number: '" + v + "'");
        }
        if (used != v.size()) fail("trailing characters in '" + v + "'");
        return d;
    }

    long long integer(const std::string& v) const {
        std::size_t used = 0;
        long long d = 0;
        try {
            d = std::stoll(v, &used);
        } catch (const std::exception&) {
            fail("not an integer: '" + v + "'");
        }
        if (used != v.size()) fail("trailing characters in '" + v + "'");
        return d;
    }

    std::uint64_t unsigned_integer(const std::string& v) const {
        std::size_t used = 0;
        unsigned long long d = 0;
        try {
            d = std::stoull(v, &used);
        } catch (const std::exception&) {
            fail("not an unsigned integer: '" + v + "'");
        }
        if (used != v.size()) fail("trailing characters in '" + v + "'");
        return d;
    }

    bool boolean(const std::string& v) const {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        fail("expected true or false, got '" + v + "'");
    }

    std::vector<std::string> list(const std::string& v) const {
        std::vector<std::string> items;
        std::string cur;
        for (char c : v) {
            if (c == ',') {
                items.push_back(trim(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        items.push_back(trim(cur));
        for (const auto& item : items)
            if (item.empty()) fail("empty list element");
        return items;
    }

    std::vector<double> numbers(const std::string& v) const {
        std::vector<double> out;
        for (const auto& item : list(v)) out.push_back(number(item));
        return out;
    }
};

const std::string kAlgorithmNames[] = {"gnca", "gca", "gmc"};

ForecastMode parse_mode(const Ctx& ctx, const std::string& v) {
    if (v == "offline") return ForecastMode::offline;
    if (v == "online") return ForecastMode::online;
    if (v == "oracle") return ForecastMode::oracle;
    ctx.fail("forecast.mode must be offline, online or oracle");
}

const char* mode_name(ForecastMode m) {
    switch (m) {
        case ForecastMode::offline: return "offline";
        case ForecastMode::online: return "online";
        case ForecastMode::oracle: return "oracle";
    }
    return "offline";
}

Algorithm parse_algorithm(const Ctx& ctx, const std::string& v) {
    for (int i = 0; i < 3; ++i)
        if (v == kAlgorithmNames[i]) return static_cast<Algorithm>(i);
    ctx.fail("unknown algorithm '" + v + "'");
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += csv::format_double(values[i]);
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw ConfigError("failed while writing " + path.string());
}

}  // namespace

const std::string& algorithm_name(Algorithm a) {
    return kAlgorithmNames[static_cast<int>(a)];
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string profile;
    for (std::size_t i = 0; i < cfg.workload.videos_per_hour.size(); ++i) {
        if (i) profile += ',';
        profile += std::to_string(cfg.workload.videos_per_hour[i]);
    }
    std::string algs;
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
        if (i) algs += ',';
        algs += algorithm_name(cfg.algorithms[i]);
    }
    std::ostringstream out;
    out << "seed = " << cfg.seed << '\n'
        << "out = " << cfg.out_dir.string() << '\n'
        << "workload.source = " << cfg.workload_source << '\n'
        << "workload.file = " << cfg.workload_file.string() << '\n'
        << "workload.horizon_hours = " << cfg.workload.horizon_hours << '\n'
        << "workload.viewers_per_video = "
        << csv::format_double(cfg.workload.viewers_per_video) << '\n'
        << "workload.zipf_exponent = "
        << csv::format_double(cfg.workload.zipf_exponent) << '\n'
        << "workload.videos_per_hour = " << profile << '\n'
        << "paths.catalog = " << cfg.catalog_path.string() << '\n'
        << "paths.rtt = " << cfg.rtt_path.string() << '\n'
        << "paths.prices = " << cfg.prices_path.string() << '\n'
        << "optimizer.node_limit = " << cfg.node_limit << '\n'
        << "grid.delay_ms = " << join_doubles(cfg.delay_grid) << '\n'
        << "grid.diss_pct = " << join_doubles(cfg.diss_grid) << '\n'
        << "forecast.epsilon = " << cfg.epsilon << '\n'
        << "forecast.train_fraction = " << csv::format_double(cfg.train_fraction)
        << '\n'
        << "forecast.mode = " << mode_name(cfg.mode) << '\n'
        << "forecast.mlp_epochs = " << cfg.mlp_epochs << '\n'
        << "forecast.mlp_learning_rate = "
        << csv::format_double(cfg.mlp_learning_rate) << '\n'
        << "forecast.mlp_batch = " << cfg.mlp_batch << '\n'
        << "phase2.test_hours = " << cfg.test_hours << '\n'
        << "allocator.od_limit = " << cfg.od_limit << '\n'
        << "allocator.literal_diss_guard = "
        << (cfg.literal_diss_guard ? "true" : "false") << '\n'
        << "algorithms = " << algs << '\n';
    return out.str();
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (workload_source != "generate" && workload_source != "file")
        fail("workload.source must be generate or file");
    if (workload_source == "file" && workload_file.empty())
        fail("workload.source=file requires workload.file");
    if (workload.horizon_hours <= 0) fail("workload.horizon_hours must be positive");
    if (workload.viewers_per_video < 0) fail("workload.viewers_per_video must be >= 0");
    if (workload.zipf_exponent < 0) fail("workload.zipf_exponent must be >= 0");
    for (int v : workload.videos_per_hour)
        if (v < 0) fail("workload.videos_per_hour entries must be >= 0");
    if (node_limit < 1) fail("optimizer.node_limit must be positive");
    if (delay_grid.empty()) fail("grid.delay_ms must not be empty");
    for (double d : delay_grid)
        if (!(d > 0)) fail("grid.delay_ms entries must be positive");
    if (diss_grid.empty()) fail("grid.diss_pct must not be empty");
    for (double d : diss_grid)
        if (d < 0 || d > 100) fail("grid.diss_pct entries must be percentages");
    if (epsilon < 1) fail("forecast.epsilon must be at least 1");
    if (!(train_fraction > 0 && train_fraction < 1))
        fail("forecast.train_fraction must be inside (0, 1)");
    if (mlp_epochs < 0) fail("forecast.mlp_epochs must be >= 0");
    if (!(mlp_learning_rate > 0)) fail("forecast.mlp_learning_rate must be positive");
    if (mlp_batch < 1) fail("forecast.mlp_batch must be positive");
    if (test_hours < 1) fail("phase2.test_hours must be positive");
    if (od_limit < 0) fail("allocator.od_limit must be >= 0");
    if (algorithms.empty()) fail("algorithms must not be empty");
    for (std::size_t i = 0; i < algorithms.size(); ++i)
        for (std::size_t j = i + 1; j < algorithms.size(); ++j)
            if (algorithms[i] == algorithms[j]) fail("duplicate algorithm");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        Ctx ctx{origin, line_no};
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) ctx.fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) ctx.fail("empty key");

        if (key == "seed") {
            cfg.seed = ctx.unsigned_integer(value);
        } else if (key == "out") {
            cfg.out_dir = value;
        } else if (key == "workload.source") {
            cfg.workload_source = value;
        } else if (key == "workload.file") {
            cfg.workload_file = value;
        } else if (key == "workload.horizon_hours") {
            cfg.workload.horizon_hours = static_cast<int>(ctx.integer(value));
        } else if (key == "workload.viewers_per_video") {
            cfg.workload.viewers_per_video = ctx.number(value);
        } else if (key == "workload.zipf_exponent") {
            cfg.workload.zipf_exponent = ctx.number(value);
        } else if (key == "workload.videos_per_hour") {
            const auto items = ctx.list(value);
            if (items.size() != cfg.workload.videos_per_hour.size())
                ctx.fail("workload.videos_per_hour needs 24 values");
            for (std::size_t i = 0; i < items.size(); ++i)
                cfg.workload.videos_per_hour[i] = static_cast<int>(ctx.integer(items[i]));
        } else if (key == "paths.catalog") {
            cfg.catalog_path = value;
        } else if (key == "paths.rtt") {
            cfg.rtt_path = value;
        } else if (key == "paths.prices") {
            cfg.prices_path = value;
        } else if (key == "optimizer.node_limit") {
            cfg.node_limit = ctx.integer(value);
        } else if (key == "grid.delay_ms") {
            cfg.delay_grid = ctx.numbers(value);
        } else if (key == "grid.diss_pct") {
            cfg.diss_grid = ctx.numbers(value);
        } else if (key == "forecast.epsilon") {
            cfg.epsilon = static_cast<int>(ctx.integer(value));
        } else if (key == "forecast.train_fraction") {
            cfg.train_fraction = ctx.number(value);
        } else if (key == "forecast.mode") {
            cfg.mode = parse_mode(ctx, value);
        } else if (key == "forecast.mlp_epochs") {
            cfg.mlp_epochs = static_cast<int>(ctx.integer(value));
        } else if (key == "forecast.mlp_learning_rate") {
            cfg.mlp_learning_rate = ctx.number(value);
        } else if (key == "forecast.mlp_batch") {
            cfg.mlp_batch = static_cast<int>(ctx.integer(value));
        } else if (key == "phase2.test_hours") {
            cfg.test_hours = static_cast<int>(ctx.integer(value));
        } else if (key == "allocator.od_limit") {
            cfg.od_limit = ctx.integer(value);
        } else if (key == "allocator.literal_diss_guard") {
            cfg.literal_diss_guard = ctx.boolean(value);
        } else if (key == "algorithms") {
            cfg.algorithms.clear();
            for (const auto& item : ctx.list(value))
                cfg.algorithms.push_back(parse_algorithm(ctx, item));
        } else {
            ctx.fail("unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path.string());
}

std::string config_reference() {
    return
        "seed: master seed for workload generation and network training\n"
        "out: output directory\n"
        "workload.source: generate | file\n"
        "workload.file: long-form workload CSV (source=file)\n"
        "workload.horizon_hours: generated horizon length\n"
        "workload.viewers_per_video: mean viewer pool per video\n"
        "workload.zipf_exponent: popularity skew across an hour's videos\n"
        "workload.videos_per_hour: 24 comma-separated arrivals per hour of day\n"
        "paths.catalog, paths.rtt, paths.prices: data files; empty = built-ins\n"
        "optimizer.node_limit: search-node budget per video\n"
        "grid.delay_ms: delay thresholds to evaluate\n"
        "grid.diss_pct: dissatisfaction budgets to evaluate, percent\n"
        "forecast.epsilon: forecaster input window, hours\n"
        "forecast.train_fraction: chronological train share\n"
        "forecast.mode: offline | online | oracle\n"
        "forecast.mlp_epochs, forecast.mlp_learning_rate, forecast.mlp_batch\n"
        "phase2.test_hours: evaluation day length (last slots of the horizon)\n"
        "allocator.od_limit: on-demand instances per region and slot\n"
        "allocator.literal_diss_guard: check the budget before the current demand\n"
        "algorithms: subset of gnca,gca,gmc\n";
}

Bundle load_bundle(const ExperimentConfig& cfg) {
    Bundle b;
    b.catalog = cfg.catalog_path.empty() ? default_region_catalog()
                                         : csv::read_catalog(cfg.catalog_path);
    b.rtt = cfg.rtt_path.empty() ? default_rtt_matrix(b.catalog)
                                 : csv::read_rtt(cfg.rtt_path, b.catalog);
    if (cfg.prices_path.empty()) {
        if (b.catalog.size() != 10)
            throw ConfigError(
                "built-in prices cover the built-in catalog only; provide "
                "paths.prices for a custom catalog");
        b.prices = default_price_book();
    } else {
        b.prices = csv::read_price_book(cfg.prices_path, b.catalog);
    }
    if (const auto v = b.prices.validate(); !v.empty()) throw ConfigError(v.front());
    if (const auto v = b.rtt.validate(); !v.empty()) throw ConfigError(v.front());
    if (b.rtt.regions() != b.catalog.size() || b.prices.regions() != b.catalog.size())
        throw ConfigError("catalog, delay table and price book sizes disagree");
    return b;
}

Workload load_or_generate_workload(const ExperimentConfig& cfg, const Bundle& bundle,
                                   std::vector<std::string>* warnings) {
    if (cfg.workload_source == "file")
        return csv::read_workload(cfg.workload_file, bundle.catalog, warnings);
    WorkloadConfig wc = cfg.workload;
    wc.seed = cfg.seed;
    return generate_workload(wc, bundle.catalog);
}

Phase1Result run_phase1(const Bundle& bundle, const Workload& workload,
                        const OptimizerConfig& ocfg) {
    Phase1Result out;
    out.delay_ms = ocfg.delay_threshold_ms;
    out.solutions.reserve(workload.size());
    for (const auto& slot : workload)
        out.solutions.push_back(solve_slot(slot.slot, slot.videos, slot.demands,
                                           bundle.rtt, bundle.prices, ocfg));
    out.series = aggregate_instance_counts(out.solutions, bundle.catalog.size());
    return out;
}

ForecastResult fit_models(const ExperimentConfig& cfg,
                          const std::vector<InstanceSeries>& series) {
    ForecastResult out;
    out.models.reserve(series.size());
    for (const auto& s : series) {
        const auto windows = build_windows(s, cfg.epsilon);
        const auto [train, test] = chronological_split(windows, cfg.train_fraction);
        auto candidates = default_model_grid(cfg.epsilon, cfg.mlp_epochs,
                                             cfg.mlp_learning_rate, cfg.mlp_batch,
                                             cfg.seed);
        const auto selection = select_model(candidates, train, test);
        for (const auto& score : selection.scores)
            out.scores.push_back({s.region, score});
        out.selected.push_back(candidates[selection.best]->name());
        out.models.push_back(std::move(candidates[selection.best]));
    }
    return out;
}

SlotIndex test_start_slot(const ExperimentConfig& cfg, std::size_t horizon) {
    const auto start = static_cast<long long>(horizon) - cfg.test_hours;
    // Warm-up covers the first epsilon + 2 slots: the window itself plus the
    // two-slot pipeline lag of the deployment timeline.
    if (start < cfg.epsilon + 2)
        throw ConfigError("horizon of " + std::to_string(horizon) +
                          " slots leaves no room for " + std::to_string(cfg.test_hours) +
                          " evaluation slots after the " +
                          std::to_string(cfg.epsilon + 2) + "-slot warm-up");
    return static_cast<SlotIndex>(start);
}

csv::ReservationTable build_reservations(const ExperimentConfig& cfg,
                                         const std::vector<InstanceSeries>& series,
                                         const std::vector<const Forecaster*>& models) {
    if (series.empty()) throw ConfigError("no instance series");
    const auto horizon = series.front().counts.size();
    const SlotIndex start = test_start_slot(cfg, horizon);
    csv::ReservationTable table;
    for (SlotIndex u = start; u < static_cast<SlotIndex>(horizon); ++u) {
        std::vector<Viewers> reserved;
        if (cfg.mode == ForecastMode::oracle) {
            for (const auto& s : series)
                reserved.push_back(s.counts[static_cast<std::size_t>(u)]);
        } else {
            // online: history through u-1 predicts u. offline: the prediction
            // was made one slot earlier, from history through u-2.
            const std::size_t len = static_cast<std::size_t>(
                cfg.mode == ForecastMode::online ? u : u - 1);
            std::vector<InstanceSeries> history = series;
            for (auto& s : history) s.counts.resize(len);
            reserved = reservation_pipeline(history, models, cfg.epsilon);
        }
        table.emplace(u, std::move(reserved));
    }
    return table;
}

Phase2Result run_phase2(const ExperimentConfig& cfg, const Bundle& bundle,
                        const Workload& workload,
                        const csv::ReservationTable& reservations, double delay_ms,
                        double diss_pct) {
    Phase2Result out;
    out.delay_ms = delay_ms;
    out.diss_pct = diss_pct;
    const SlotIndex start = test_start_slot(cfg, workload.size());
    AllocatorConfig acfg;
    acfg.delay_threshold_ms = delay_ms;
    acfg.diss_threshold_bp = AllocatorConfig::percent_to_bp(diss_pct);
    acfg.literal_diss_guard = cfg.literal_diss_guard;
    const std::vector<Viewers> no_reserved(
        static_cast<std::size_t>(bundle.catalog.size()), 0);

    for (SlotIndex u = start; u < static_cast<SlotIndex>(workload.size()); ++u) {
        const auto it = reservations.find(u);
        if (it == reservations.end())
            throw ConfigError("no reservation row for slot " + std::to_string(u));
        const auto& slot = workload[static_cast<std::size_t>(u)];
        for (Algorithm a : cfg.algorithms) {
            const std::string& name = algorithm_name(a);
            csv::MetricsRow row;
            row.slot = u;
            row.algorithm = name;
            if (!slot.videos.empty()) {
                // Reservations are meaningless to the on-demand-only baseline,
                // so it is charged for none.
                const auto& reserved =
                    (a == Algorithm::gmc) ? no_reserved : it->second;
                auto ledger = CapacityLedger::make(reserved, cfg.od_limit);
                SlotOutcome outcome;
                switch (a) {
                    case Algorithm::gnca:
                        outcome = gnca_allocate_slot(slot.videos, slot.demands, ledger,
                                                     bundle.rtt, bundle.prices, acfg);
                        break;
                    case Algorithm::gca:
                        outcome = gca_allocate_slot(slot.videos, slot.demands, ledger,
                                                    bundle.rtt, bundle.prices, acfg);
                        break;
                    case Algorithm::gmc:
                        outcome = gmc_allocate_slot(slot.videos, slot.demands, ledger,
                                                    bundle.rtt, bundle.prices, acfg);
                        break;
                }
                row.metrics =
                    compute_slot_metrics(outcome, slot.videos, slot.demands, ledger,
                                         bundle.rtt, bundle.prices, reserved);
                auto& merged = out.merged_outcomes[name];
                for (auto& vo : outcome.videos) merged.videos.push_back(std::move(vo));
            }
            out.metrics[name].push_back(std::move(row));
        }
    }
    return out;
}

std::filesystem::path phase1_dir(const ExperimentConfig& cfg, double delay_ms) {
    return cfg.out_dir / "phase1" / ("D" + csv::format_double(delay_ms));
}

std::filesystem::path phase2_dir(const ExperimentConfig& cfg, double delay_ms,
                                 double diss_pct) {
    return cfg.out_dir / "phase2" /
           ("D" + csv::format_double(delay_ms) + "_diss" + csv::format_double(diss_pct));
}

void stage_gen_workload(const ExperimentConfig& cfg) {
    const Bundle bundle = load_bundle(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "config_used.txt", serialize_config(cfg));
    csv::write_catalog(cfg.out_dir / "catalog.csv", bundle.catalog);
    csv::write_rtt(cfg.out_dir / "rtt.csv", bundle.catalog, bundle.rtt);
    csv::write_price_book(cfg.out_dir / "prices.csv", bundle.catalog, bundle.prices);
    const Workload workload = load_or_generate_workload(cfg, bundle);
    csv::write_workload(cfg.out_dir / "workload.csv", bundle.catalog, workload);
}

void stage_optimize(const ExperimentConfig& cfg) {
    const Bundle bundle = load_bundle(cfg);
    const Workload workload =
        csv::read_workload(cfg.out_dir / "workload.csv", bundle.catalog);
    for (double d : cfg.delay_grid) {
        OptimizerConfig ocfg;
        ocfg.delay_threshold_ms = d;
        ocfg.node_limit = cfg.node_limit;
        const Phase1Result p1 = run_phase1(bundle, workload, ocfg);
        const auto dir = phase1_dir(cfg, d);
        std::filesystem::create_directories(dir);
        csv::write_slot_counts(dir / "counts.csv", bundle.catalog, p1.solutions);
        csv::write_series(dir / "series.csv", bundle.catalog, p1.series);
        std::vector<VideoMeta> videos;
        std::vector<AllocationPlan> plans;
        for (std::size_t s = 0; s < workload.size(); ++s) {
            videos.insert(videos.end(), workload[s].videos.begin(),
                          workload[s].videos.end());
            plans.insert(plans.end(), p1.solutions[s].plans.begin(),
                         p1.solutions[s].plans.end());
        }
        csv::write_plan_placements(dir / "plan_placements.csv", bundle.catalog, videos,
                                   plans);
        csv::write_plan_assignments(dir / "plan_assignments.csv", bundle.catalog,
                                    videos, plans);
    }
}

void stage_build_dataset(const ExperimentConfig& cfg) {
    const Bundle bundle = load_bundle(cfg);
    for (double d : cfg.delay_grid) {
        const auto dir = phase1_dir(cfg, d);
        const auto series = csv::read_series(dir / "series.csv", bundle.catalog);
        std::ostringstream out;
        out << "region,row,split,target";
        for (int i = 0; i < cfg.epsilon; ++i) out << ",x" << i;
        out << '\n';
        for (const auto& s : series) {
            const auto windows = build_windows(s, cfg.epsilon);
            const std::size_t cut = chronological_split(windows, cfg.train_fraction)
                                        .first.rows();
            for (std::size_t i = 0; i < windows.rows(); ++i) {
                out << bundle.catalog.regions[static_cast<std::size_t>(s.region)].name
                    << ',' << i << ',' << (i < cut ? "train" : "test") << ','
                    << csv::format_double(windows.targets[i]);
                for (double x : windows.inputs[i]) out << ',' << csv::format_double(x);
                out << '\n';
            }
        }
        write_text(dir / "dataset.csv", out.str());
    }
}

void stage_forecast(const ExperimentConfig& cfg) {
    const Bundle bundle = load_bundle(cfg);
    for (double d : cfg.delay_grid) {
        const auto dir = phase1_dir(cfg, d);
        const auto series = csv::read_series(dir / "series.csv", bundle.catalog);
        const ForecastResult fr = fit_models(cfg, series);
        csv::write_scores(dir / "scores.csv", bundle.catalog, fr.scores);
        std::string selected = "region,model\n";
        for (std::size_t r = 0; r < fr.selected.size(); ++r)
            selected += bundle.catalog.regions[r].name + "," + fr.selected[r] + "\n";
        write_text(dir / "selected_models.csv", selected);
        std::vector<const Forecaster*> models;
        for (const auto& m : fr.models) models.push_back(m.get());
        const auto reservations = build_reservations(cfg, series, models);
        csv::write_reservations(dir / "reservations.csv", bundle.catalog, reservations);
    }
}

void stage_simulate(const ExperimentConfig& cfg) {
    const Bundle bundle = load_bundle(cfg);
    const Workload workload =
        csv::read_workload(cfg.out_dir / "workload.csv", bundle.catalog);
    for (double d : cfg.delay_grid) {
        const auto reservations =
            csv::read_reservations(phase1_dir(cfg, d) / "reservations.csv",
                                   bundle.catalog);
        for (double diss : cfg.diss_grid) {
            const Phase2Result p2 =
                run_phase2(cfg, bundle, workload, reservations, d, diss);
            const auto dir = phase2_dir(cfg, d, diss);
            std::filesystem::create_directories(dir);
            std::vector<csv::MetricsRow> rows;
            const std::size_t slots =
                p2.metrics.empty() ? 0 : p2.metrics.begin()->second.size();
            for (std::size_t i = 0; i < slots; ++i)
                for (Algorithm a : cfg.algorithms)
                    rows.push_back(p2.metrics.at(algorithm_name(a))[i]);
            csv::write_metrics(dir / "metrics.csv", rows);
            for (Algorithm a : cfg.algorithms) {
                const std::string& name = algorithm_name(a);
                static const SlotOutcome kEmpty;
                const auto it = p2.merged_outcomes.find(name);
                const SlotOutcome& merged =
                    it == p2.merged_outcomes.end() ? kEmpty : it->second;
                csv::write_outcome_placements(
                    dir / ("outcomes_" + name + "_placements.csv"), bundle.catalog,
                    merged);
                csv::write_outcome_served(dir / ("outcomes_" + name + "_served.csv"),
                                          bundle.catalog, merged);
            }
        }
    }
}

void stage_report(const ExperimentConfig& cfg) {
    const auto report_dir = cfg.out_dir / "report";
    std::filesystem::create_directories(report_dir);
    std::ostringstream summary;
    summary << "delay_ms,diss_pct,algorithm,slots,total_cost,mean_latency_ms,"
               "mean_hit_pct,mean_on_demand_pct,mean_diss_pct,unserved\n";
    std::ostringstream ordering;
    ordering << "delay_ms,diss_pct,slots,gnca_le_gca,gca_le_gmc,fully_ordered,"
                "gnca_cost,gca_cost,gmc_cost,gnca_over_gmc\n";
    const bool all_three = cfg.algorithms.size() == 3;
    for (double d : cfg.delay_grid) {
        for (double diss : cfg.diss_grid) {
            const auto rows =
                csv::read_metrics(phase2_dir(cfg, d, diss) / "metrics.csv");
            std::map<std::string, std::vector<const csv::MetricsRow*>> by_alg;
            for (const auto& row : rows) by_alg[row.algorithm].push_back(&row);
            for (Algorithm a : cfg.algorithms) {
                const auto& name = algorithm_name(a);
                const auto& list = by_alg[name];
                double cost = 0, lat = 0, hit = 0, od = 0, dp = 0;
                long long unserved = 0;
                for (const auto* row : list) {
                    cost += row->metrics.total_cost;
                    lat += row->metrics.avg_latency_ms;
                    hit += row->metrics.hit_pct;
                    od += row->metrics.on_demand_pct;
                    dp += row->metrics.diss_pct;
                    unserved += row->metrics.unserved_viewers;
                }
                const double n = list.empty() ? 1.0 : static_cast<double>(list.size());
                summary << csv::format_double(d) << ',' << csv::format_double(diss)
                        << ',' << name << ',' << list.size() << ','
                        << csv::format_double(cost) << ','
                        << csv::format_double(lat / n) << ','
                        << csv::format_double(hit / n) << ','
                        << csv::format_double(od / n) << ','
                        << csv::format_double(dp / n) << ',' << unserved << '\n';
            }
            if (!all_three) continue;
            // Per-slot cost ordering of the three strategies, recomputed from
            // the hourly rows.
            std::map<SlotIndex, std::map<std::string, double>> cost_by_slot;
            for (const auto& row : rows)
                cost_by_slot[row.slot][row.algorithm] = row.metrics.total_cost;
            int slots = 0, ab = 0, bc = 0, full = 0;
            double ca = 0, cb = 0, cc = 0;
            for (const auto& [slot, costs] : cost_by_slot) {
                (void)slot;
                if (costs.size() != 3) continue;
                ++slots;
                const double g = costs.at("gnca"), c = costs.at("gca"),
                             m = costs.at("gmc");
                ca += g;
                cb += c;
                cc += m;
                const bool le1 = g <= c + 1e-9, le2 = c <= m + 1e-9;
                ab += le1;
                bc += le2;
                full += le1 && le2;
            }
            ordering << csv::format_double(d) << ',' << csv::format_double(diss) << ','
                     << slots << ',' << ab << ',' << bc << ',' << full << ','
                     << csv::format_double(ca) << ',' << csv::format_double(cb) << ','
                     << csv::format_double(cc) << ',';
            if (cc > 0)
                ordering << csv::format_double(ca / cc);
            ordering << '\n';
        }
    }
    write_text(report_dir / "summary.csv", summary.str());
    if (all_three) write_text(report_dir / "ordering.csv", ordering.str());
}

void stage_all(const ExperimentConfig& cfg) {
    stage_gen_workload(cfg);
    stage_optimize(cfg);
    stage_build_dataset(cfg);
    stage_forecast(cfg);
    stage_simulate(cfg);
    stage_report(cfg);
}

}  // namespace lvsim
