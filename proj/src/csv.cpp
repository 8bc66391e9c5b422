#include "lvsim/csv.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace lvsim::csv {
namespace {

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path) {
        if (!in_) throw CsvError("cannot open " + path.string());
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            fields = split_line(line);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw CsvError(path_.string() + ":" + std::to_string(line_) + ": " + msg);
    }

    void note(std::vector<std::string>* warnings, const std::string& msg) const {
        if (warnings)
            warnings->push_back(path_.string() + ":" + std::to_string(line_) + ": " +
                                msg);
    }

    void expect_header(const std::string& expected) {
        std::vector<std::string> fields;
        if (!next(fields)) fail("missing header row");
        std::string got;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) got += ',';
            got += fields[i];
        }
        if (got != expected)
            fail("expected header '" + expected + "', got '" + got + "'");
    }

    void want(const std::vector<std::string>& fields, std::size_t n) const {
        if (fields.size() != n)
            fail("expected " + std::to_string(n) + " fields, got " +
                 std::to_string(fields.size()));
    }

    double to_double(const std::string& field) const {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            fail("not a number: '" + field + "'");
        }
        if (used != field.size()) fail("trailing characters in '" + field + "'");
        return v;
    }

    long long to_ll(const std::string& field) const {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(field, &used);
        } catch (const std::exception&) {
            fail("not an integer: '" + field + "'");
        }
        if (used != field.size()) fail("trailing characters in '" + field + "'");
        return v;
    }

    int to_int(const std::string& field) const {
        const long long v = to_ll(field);
        if (v < INT_MIN || v > INT_MAX) fail("value out of range: '" + field + "'");
        return static_cast<int>(v);
    }

    int to_region(const std::string& name, const RegionCatalog& catalog) const {
        try {
            return catalog.index_of(name);
        } catch (const ValidationError&) {
            fail("unknown region '" + name + "'");
        }
    }

    Quality to_quality(const std::string& label) const {
        try {
            return parse_quality(label);
        } catch (const ValidationError&) {
            fail("unknown quality '" + label + "'");
        }
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    long long line_ = 0;
};

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw CsvError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw CsvError("failed while writing " + path.string());
}

const std::string& region_name(const RegionCatalog& catalog, int index) {
    if (index < 0 || index >= catalog.size())
        throw CsvError("region index " + std::to_string(index) +
                       " outside the catalog");
    return catalog.regions[static_cast<std::size_t>(index)].name;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

void write_catalog(const std::filesystem::path& path, const RegionCatalog& catalog) {
    auto out = open_out(path);
    out << "region,name,lat,lon\n";
    for (const auto& r : catalog.regions)
        out << r.index << ',' << r.name << ',' << format_double(r.lat) << ','
            << format_double(r.lon) << '\n';
    finish(out, path);
}

RegionCatalog read_catalog(const std::filesystem::path& path) {
    Reader in(path);
    in.expect_header("region,name,lat,lon");
    RegionCatalog catalog;
    std::set<std::string> names;
    std::vector<std::string> f;
    while (in.next(f)) {
        in.want(f, 4);
        const int index = in.to_int(f[0]);
        if (index != catalog.size())
            in.fail("region indices must be consecutive from 0");
        if (f[1].empty()) in.fail("empty region name");
        if (!names.insert(f[1]).second) in.fail("duplicate region '" + f[1] + "'");
        const double lat = in.to_double(f[2]);
        const double lon = in.to_double(f[3]);
        if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0)
            in.fail("coordinates out of range");
        catalog.regions.push_back({index, f[1], lat, lon});
    }
    if (catalog.size() == 0) throw CsvError(path.string() + ": no regions");
    return catalog;
}

// ---------------------------------------------------------------------------
// Delay table
// ---------------------------------------------------------------------------

void write_rtt(const std::filesystem::path& path, const RegionCatalog& catalog,
               const RttMatrix& rtt) {
    if (rtt.regions() != catalog.size())
        throw CsvError("delay table size does not match the catalog");
    auto out = open_out(path);
    out << "region";
    for (const auto& r : catalog.regions) out << ',' << r.name;
    out << '\n';
    for (int i = 0; i < catalog.size(); ++i) {
        out << region_name(catalog, i);
        for (int j = 0; j < catalog.size(); ++j) out << ',' << format_double(rtt.at(i, j));
        out << '\n';
    }
    finish(out, path);
}

RttMatrix read_rtt(const std::filesystem::path& path, const RegionCatalog& catalog) {
    Reader in(path);
    const int n = catalog.size();
    std::vector<std::string> f;
    if (!in.next(f)) in.fail("missing header row");
    in.want(f, static_cast<std::size_t>(n) + 1);
    if (f[0] != "region") in.fail("first header field must be 'region'");
    std::vector<int> col(static_cast<std::size_t>(n));
    std::set<int> seen_cols;
    for (int j = 0; j < n; ++j) {
        col[static_cast<std::size_t>(j)] = in.to_region(f[static_cast<std::size_t>(j + 1)], catalog);
        if (!seen_cols.insert(col[static_cast<std::size_t>(j)]).second)
            in.fail("duplicate column '" + f[static_cast<std::size_t>(j + 1)] + "'");
    }
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n)));
    std::set<int> seen_rows;
    while (in.next(f)) {
        in.want(f, static_cast<std::size_t>(n) + 1);
        const int serve = in.to_region(f[0], catalog);
        if (!seen_rows.insert(serve).second) in.fail("duplicate row '" + f[0] + "'");
        for (int j = 0; j < n; ++j)
            rows[static_cast<std::size_t>(serve)][static_cast<std::size_t>(
                col[static_cast<std::size_t>(j)])] = in.to_double(f[static_cast<std::size_t>(j + 1)]);
    }
    if (static_cast<int>(seen_rows.size()) != n)
        throw CsvError(path.string() + ": missing delay rows");
    try {
        return RttMatrix::from_rows(rows);
    } catch (const ValidationError& e) {
        throw CsvError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Price book
// ---------------------------------------------------------------------------

void write_price_book(const std::filesystem::path& path, const RegionCatalog& catalog,
                      const PriceBook& prices) {
    if (prices.regions() != catalog.size())
        throw CsvError("price book size does not match the catalog");
    auto out = open_out(path);
    out << "region,zeta,mu,eta,omega\n";
    for (int i = 0; i < catalog.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        out << region_name(catalog, i) << ',' << format_double(prices.zeta[k]) << ','
            << format_double(prices.mu[k]) << ',' << format_double(prices.eta[k]) << ','
            << format_double(prices.omega[k]) << '\n';
    }
    finish(out, path);
}

PriceBook read_price_book(const std::filesystem::path& path,
                          const RegionCatalog& catalog) {
    Reader in(path);
    in.expect_header("region,zeta,mu,eta,omega");
    const auto n = static_cast<std::size_t>(catalog.size());
    PriceBook prices;
    prices.zeta.assign(n, 0.0);
    prices.mu.assign(n, 0.0);
    prices.eta.assign(n, 0.0);
    prices.omega.assign(n, 0.0);
    std::set<int> seen;
    std::vector<std::string> f;
    while (in.next(f)) {
        in.want(f, 5);
        const int r = in.to_region(f[0], catalog);
        if (!seen.insert(r).second) in.fail("duplicate region '" + f[0] + "'");
        const auto k = static_cast<std::size_t>(r);
        prices.zeta[k] = in.to_double(f[1]);
        prices.mu[k] = in.to_double(f[2]);
        prices.eta[k] = in.to_double(f[3]);
        prices.omega[k] = in.to_double(f[4]);
    }
    if (static_cast<int>(seen.size()) != catalog.size())
        throw CsvError(path.string() + ": missing price rows");
    if (const auto violations = prices.validate(); !violations.empty())
        throw CsvError(path.string() + ": " + violations.front());
    return prices;
}

// ---------------------------------------------------------------------------
// Workload, long form
// ---------------------------------------------------------------------------

namespace {
const char* kWorkloadHeader =
    "video_id,slot,broadcast_region,original_quality,viewer_region,"
    "requested_quality,viewers";
}

void write_workload(const std::filesystem::path& path, const RegionCatalog& catalog,
                    const Workload& workload) {
    auto out = open_out(path);
    out << kWorkloadHeader << '\n';
    for (const auto& slot : workload) {
        if (slot.videos.size() != slot.demands.size())
            throw CsvError("slot video and demand lists differ in length");
        for (std::size_t v = 0; v < slot.videos.size(); ++v) {
            const auto& video = slot.videos[v];
            const std::string prefix = video.video_id + ',' +
                                       std::to_string(slot.slot) + ',' +
                                       region_name(catalog, video.broadcast_region) +
                                       ',' + quality_label(video.original_quality);
            const auto entries = slot.demands[v].entries();
            if (entries.empty()) {
                out << prefix << ",,,\n";
                continue;
            }
            for (const auto& e : entries)
                out << prefix << ',' << region_name(catalog, e.region) << ','
                    << quality_label(e.quality) << ',' << e.viewers << '\n';
        }
    }
    finish(out, path);
}

Workload read_workload(const std::filesystem::path& path, const RegionCatalog& catalog,
                       std::vector<std::string>* warnings) {
    Reader in(path);
    in.expect_header(kWorkloadHeader);
    Workload workload;
    // video id -> (slot, position) of the already-registered video
    std::map<std::string, std::pair<std::size_t, std::size_t>> index;
    std::vector<std::string> f;
    while (in.next(f)) {
        in.want(f, 7);
        if (f[0].empty()) in.fail("empty video id");
        const int slot = in.to_int(f[1]);
        if (slot < 0) in.fail("negative slot");
        const int broadcast = in.to_region(f[2], catalog);
        const Quality original = in.to_quality(f[3]);
        if (static_cast<std::size_t>(slot) >= workload.size()) {
            const std::size_t old = workload.size();
            workload.resize(static_cast<std::size_t>(slot) + 1);
            for (std::size_t s = old; s < workload.size(); ++s)
                workload[s].slot = static_cast<SlotIndex>(s);
        }
        auto& bucket = workload[static_cast<std::size_t>(slot)];
        auto it = index.find(f[0]);
        if (it == index.end()) {
            VideoMeta video;
            video.video_id = f[0];
            video.slot = slot;
            video.broadcast_region = broadcast;
            video.original_quality = original;
            bucket.videos.push_back(std::move(video));
            bucket.demands.emplace_back(catalog.size());
            it = index
                     .emplace(f[0], std::make_pair(static_cast<std::size_t>(slot),
                                                   bucket.videos.size() - 1))
                     .first;
        } else {
            const auto& known = workload[it->second.first].videos[it->second.second];
            if (known.slot != slot || known.broadcast_region != broadcast ||
                known.original_quality != original)
                in.fail("video '" + f[0] + "' re-declared with different metadata");
        }
        const bool blank = f[4].empty() && f[5].empty() && f[6].empty();
        if (blank) continue;  // a video with no viewers
        const int viewer_region = in.to_region(f[4], catalog);
        Quality requested = in.to_quality(f[5]);
        const long long viewers = in.to_ll(f[6]);
        if (viewers < 0) in.fail("negative viewer count");
        if (index_of(requested) > index_of(original)) {
            in.note(warnings, "requested " + quality_label(requested) + " above broadcast " +
                                  quality_label(original) + " for '" + f[0] +
                                  "'; clamped down");
            requested = original;
        }
        if (viewers > 0)
            workload[it->second.first].demands[it->second.second].add(
                viewer_region, requested, viewers);
    }
    return workload;
}

// ---------------------------------------------------------------------------
// Raw viewer trace
// ---------------------------------------------------------------------------

Workload read_raw_trace(const std::filesystem::path& path, const RegionCatalog& catalog,
                        std::vector<std::string>* warnings) {
    Reader in(path);
    in.expect_header(
        "video_id,created_unix,broadcaster_lat,broadcaster_lon,width,height,"
        "viewer_lat,viewer_lon,viewer_height,viewers");
    struct Video {
        VideoMeta meta;
        long long hour = 0;
        DemandMatrix demand;
    };
    std::vector<Video> videos;
    std::map<std::string, std::size_t> index;
    std::vector<std::string> f;
    while (in.next(f)) {
        in.want(f, 10);
        if (f[0].empty()) in.fail("empty video id");
        auto it = index.find(f[0]);
        if (it == index.end()) {
            const long long created = in.to_ll(f[1]);
            const double blat = in.to_double(f[2]);
            const double blon = in.to_double(f[3]);
            const int width = in.to_int(f[4]);
            const int height = in.to_int(f[5]);
            if (width <= 0 || height <= 0) in.fail("non-positive video dimensions");
            Video v;
            v.meta.video_id = f[0];
            v.meta.broadcast_region = map_to_region(blat, blon, catalog);
            v.meta.original_quality = classify_bitrate(width, height);
            // Hour bucket; slots are rebased to the earliest hour afterwards.
            v.hour = static_cast<long long>(
                std::floor(static_cast<double>(created) / 3600.0));
            v.demand = DemandMatrix(catalog.size());
            videos.push_back(std::move(v));
            it = index.emplace(f[0], videos.size() - 1).first;
        }
        auto& video = videos[it->second];
        const bool blank =
            f[6].empty() && f[7].empty() && f[8].empty() && f[9].empty();
        if (blank) continue;
        const double vlat = in.to_double(f[6]);
        const double vlon = in.to_double(f[7]);
        const int vheight = in.to_int(f[8]);
        if (vheight <= 0) in.fail("non-positive viewer height");
        const long long viewers = in.to_ll(f[9]);
        if (viewers < 0) in.fail("negative viewer count");
        if (viewers == 0) continue;
        const int region = map_to_region(vlat, vlon, catalog);
        Quality requested = classify_height(vheight);
        if (index_of(requested) > index_of(video.meta.original_quality)) {
            in.note(warnings, "viewer class " + quality_label(requested) +
                                  " above broadcast " +
                                  quality_label(video.meta.original_quality) +
                                  " for '" + f[0] + "'; clamped down");
            requested = video.meta.original_quality;
        }
        video.demand.add(region, requested, viewers);
    }
    Workload workload;
    if (videos.empty()) return workload;
    long long base = videos.front().hour;
    long long last = base;
    for (const auto& v : videos) {
        base = std::min(base, v.hour);
        last = std::max(last, v.hour);
    }
    workload.resize(static_cast<std::size_t>(last - base) + 1);
    for (std::size_t s = 0; s < workload.size(); ++s)
        workload[s].slot = static_cast<SlotIndex>(s);
    for (auto& v : videos) {
        const auto s = static_cast<std::size_t>(v.hour - base);
        v.meta.slot = static_cast<SlotIndex>(s);
        workload[s].videos.push_back(std::move(v.meta));
        workload[s].demands.push_back(std::move(v.demand));
    }
    return workload;
}

// ---------------------------------------------------------------------------
// Instance series, solved counts, reservations
// ---------------------------------------------------------------------------

void write_series(const std::filesystem::path& path, const RegionCatalog& catalog,
                  const std::vector<InstanceSeries>& series) {
    if (static_cast<int>(series.size()) != catalog.size())
        throw CsvError("series list does not match the catalog");
    std::size_t length = series.empty() ? 0 : series.front().counts.size();
    for (const auto& s : series)
        if (s.counts.size() != length)
            throw CsvError("series lengths differ between regions");
    auto out = open_out(path);
    out << "slot,region,count\n";
    for (std::size_t t = 0; t < length; ++t)
        for (int r = 0; r < catalog.size(); ++r)
            out << t << ',' << region_name(catalog, r) << ','
                << series[static_cast<std::size_t>(r)].counts[t] << '\n';
    finish(out, path);
}

std::vector<InstanceSeries> read_series(const std::filesystem::path& path,
                                        const RegionCatalog& catalog) {
    Reader in(path);
    in.expect_header("slot,region,count");
    const auto n = static_cast<std::size_t>(catalog.size());
    std::vector<std::vector<Viewers>> cells(n);
    std::vector<std::string> f;
    while (in.next(f)) {
        in.want(f, 3);
        const int slot = in.to_int(f[0]);
        if (slot < 0) in.fail("negative slot");
        const auto r = static_cast<std::size_t>(in.to_region(f[1], catalog));
        const long long count = in.to_ll(f[2]);
        if (count < 0) in.fail("negative count");
        auto& col = cells[r];
        if (static_cast<std::size_t>(slot) < col.size() &&
            col[static_cast<std::size_t>(slot)] >= 0)
            in.fail("duplicate cell");
        if (static_cast<std::size_t>(slot) >= col.size())
            col.resize(static_cast<std::size_t>(slot) + 1, -1);
        col[static_cast<std::size_t>(slot)] = count;
    }
    std::size_t length = cells.empty() ? 0 : cells.front().size();
    for (const auto& col : cells)
        length = std::max(length, col.size());
    std::vector<InstanceSeries> series(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (cells[r].size() != length)
            throw CsvError(path.string() + ": missing cells for region " +
                           region_name(catalog, static_cast<int>(r)));
        for (Viewers v : cells[r])
            if (v < 0)
                throw CsvError(path.string() + ": missing cells for region " +
                               region_name(catalog, static_cast<int>(r)));
        series[r].region = static_cast<int>(r);
        series[r].counts = std::move(cells[r]);
    }
    return series;
}

void write_slot_counts(const std::filesystem::path& path, const RegionCatalog& catalog,
                       const std::vector<SlotSolution>& solutions) {
    auto out = open_out(path);
    out << "slot,region,instance_count\n";
    for (const auto& sol : solutions) {
        if (static_cast<int>(sol.instance_counts.size()) != catalog.size())
            throw CsvError("instance counts do not match the catalog");
        for (int r = 0; r < catalog.size(); ++r)
            out << sol.slot << ',' << region_name(catalog, r) << ','
                << sol.instance_counts[static_cast<std::size_t>(r)] << '\n';
    }
    finish(out, path);
}

void write_reservations(const std::filesystem::path& path, const RegionCatalog& catalog,
                        const ReservationTable& table) {
    auto out = open_out(path);
    out << "slot,region,reserved\n";
    for (const auto& [slot, counts] : table) {
        if (static_cast<int>(counts.size()) != catalog.size())
            throw CsvError("reservation row does not match the catalog");
        for (int r = 0; r < catalog.size(); ++r)
            out << slot << ',' << region_name(catalog, r) << ','
                << counts[static_cast<std::size_t>(r)] << '\n';
    }
    finish(out, path);
}

ReservationTable read_reservations(const std::filesystem::path& path,
                                   const RegionCatalog& catalog) {
    Reader in(path);
    in.expect_header("slot,region,reserved");
    ReservationTable table;
    std::vector<std::string> f;
    while (in.next(f)) {
        in.want(f, 3);
        const int slot = in.to_int(f[0]);
        const auto r = static_cast<std::size_t>(in.to_region(f[1], catalog));
        const long long reserved = in.to_ll(f[2]);
        if (reserved < 0) in.fail("negative reservation");
        auto [it, fresh] = table.try_emplace(
            slot, std::vector<Viewers>(static_cast<std::size_t>(catalog.size()), -1));
        if (it->second[r] >= 0) in.fail("duplicate cell");
        it->second[r] = reserved;
        (void)fresh;
    }
    for (const auto& [slot, counts] : table)
        for (Viewers v : counts)
            if (v < 0)
                throw CsvError(path.string() + ": incomplete row for slot " +
                               std::to_string(slot));
    return table;
}

// ---------------------------------------------------------------------------
// Model scores
// ---------------------------------------------------------------------------

void write_scores(const std::filesystem::path& path, const RegionCatalog& catalog,
                  const std::vector<ScoreRow>& rows) {
    auto out = open_out(path);
    out << "region,model,r2,mae\n";
    for (const auto& row : rows) {
        out << region_name(catalog, row.region) << ',' << row.score.model << ',';
        if (row.score.ok)
            out << format_double(row.score.r2) << ',' << format_double(row.score.mae);
        else
            out << ',';
        out << '\n';
    }
    finish(out, path);
}

// ---------------------------------------------------------------------------
// Plan dumps
// ---------------------------------------------------------------------------

void write_plan_placements(const std::filesystem::path& path,
                           const RegionCatalog& catalog,
                           const std::vector<VideoMeta>& videos,
                           const std::vector<AllocationPlan>& plans) {
    if (videos.size() != plans.size())
        throw CsvError("video and plan lists differ in length");
    auto out = open_out(path);
    out << "video_id,quality,transcode_region\n";
    for (std::size_t v = 0; v < videos.size(); ++v)
        for (const auto& p : plans[v].placements)
            out << videos[v].video_id << ',' << quality_label(p.quality) << ','
                << region_name(catalog, p.region) << '\n';
    finish(out, path);
}

void write_plan_assignments(const std::filesystem::path& path,
                            const RegionCatalog& catalog,
                            const std::vector<VideoMeta>& videos,
                            const std::vector<AllocationPlan>& plans) {
    if (videos.size() != plans.size())
        throw CsvError("video and plan lists differ in length");
    auto out = open_out(path);
    out << "video_id,quality,viewer_region,serving_region\n";
    for (std::size_t v = 0; v < videos.size(); ++v)
        for (const auto& [key, serving] : plans[v].assignments)
            out << videos[v].video_id << ',' << quality_label(key.quality) << ','
                << region_name(catalog, key.region) << ','
                << region_name(catalog, serving) << '\n';
    finish(out, path);
}

std::map<std::string, AllocationPlan> read_plans(
    const std::filesystem::path& placements_path,
    const std::filesystem::path& assignments_path, const RegionCatalog& catalog) {
    std::map<std::string, AllocationPlan> plans;
    {
        Reader in(placements_path);
        in.expect_header("video_id,quality,transcode_region");
        std::vector<std::string> f;
        while (in.next(f)) {
            in.want(f, 3);
            const Placement p{in.to_quality(f[1]), in.to_region(f[2], catalog)};
            if (!plans[f[0]].placements.insert(p).second)
                in.fail("duplicate placement for '" + f[0] + "'");
        }
    }
    {
        Reader in(assignments_path);
        in.expect_header("video_id,quality,viewer_region,serving_region");
        std::vector<std::string> f;
        while (in.next(f)) {
            in.want(f, 4);
            const DemandKey key{in.to_quality(f[1]), in.to_region(f[2], catalog)};
            const int serving = in.to_region(f[3], catalog);
            auto& plan = plans[f[0]];
            if (!plan.assignments.emplace(key, serving).second)
                in.fail("duplicate assignment for '" + f[0] + "'");
        }
    }
    return plans;
}

// ---------------------------------------------------------------------------
// Outcome dumps
// ---------------------------------------------------------------------------

void write_outcome_placements(const std::filesystem::path& path,
                              const RegionCatalog& catalog, const SlotOutcome& outcome) {
    auto out = open_out(path);
    out << "video_id,quality,region,kind\n";
    for (const auto& video : outcome.videos)
        for (const auto& [p, kind] : video.placements)
            out << video.video_id << ',' << quality_label(p.quality) << ','
                << region_name(catalog, p.region) << ','
                << (kind == InstanceKind::reserved ? "reserved" : "ondemand") << '\n';
    finish(out, path);
}

void write_outcome_served(const std::filesystem::path& path,
                          const RegionCatalog& catalog, const SlotOutcome& outcome) {
    auto out = open_out(path);
    out << "video_id,quality,viewer_region,serving_region,satisfied\n";
    for (const auto& video : outcome.videos)
        for (const auto& [key, entry] : video.served)
            out << video.video_id << ',' << quality_label(key.quality) << ','
                << region_name(catalog, key.region) << ','
                << region_name(catalog, entry.serving_region) << ','
                << (entry.satisfied ? '1' : '0') << '\n';
    finish(out, path);
}

// ---------------------------------------------------------------------------
// Hourly metrics
// ---------------------------------------------------------------------------

namespace {
const char* kMetricsHeader =
    "slot,algorithm,total_cost,avg_latency_ms,hit_pct,on_demand_pct,diss_pct,"
    "unserved";
}

void write_metrics(const std::filesystem::path& path,
                   const std::vector<MetricsRow>& rows) {
    auto out = open_out(path);
    out << kMetricsHeader << '\n';
    for (const auto& row : rows)
        out << row.slot << ',' << row.algorithm << ','
            << format_double(row.metrics.total_cost) << ','
            << format_double(row.metrics.avg_latency_ms) << ','
            << format_double(row.metrics.hit_pct) << ','
            << format_double(row.metrics.on_demand_pct) << ','
            << format_double(row.metrics.diss_pct) << ','
            << row.metrics.unserved_viewers << '\n';
    finish(out, path);
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
    Reader in(path);
    in.expect_header(kMetricsHeader);
    std::vector<MetricsRow> rows;
    std::vector<std::string> f;
    while (in.next(f)) {
        in.want(f, 8);
        MetricsRow row;
        row.slot = in.to_int(f[0]);
        if (f[1].empty()) in.fail("empty algorithm name");
        row.algorithm = f[1];
        row.metrics.total_cost = in.to_double(f[2]);
        row.metrics.avg_latency_ms = in.to_double(f[3]);
        row.metrics.hit_pct = in.to_double(f[4]);
        row.metrics.on_demand_pct = in.to_double(f[5]);
        row.metrics.diss_pct = in.to_double(f[6]);
        row.metrics.unserved_viewers = in.to_ll(f[7]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace lvsim::csv
