// Command line front end: synthetic data, daily MFA detection, partition
// similarity, consensus over time, and epidemic association statistics.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfa/community.hpp"
#include "mfa/consensus.hpp"
#include "mfa/io.hpp"
#include "mfa/similarity.hpp"
#include "mfa/stats.hpp"
#include "mfa/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& parameters, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json m = mfa::make_manifest(command, parameters, inputs, outputs);
    auto out = open_out(dir / "manifest.json");
    out << m.dump(2) << '\n';
}

std::string stem_label(const std::string& path) {
    return fs::path(path).stem().string();
}

/// Partition files share one universe: the first file defines it.
std::vector<mfa::Partition> load_partitions(std::vector<std::string> paths) {
    if (paths.empty()) throw std::invalid_argument("no partition files given");
    std::sort(paths.begin(), paths.end());
    std::vector<mfa::Partition> parts;
    mfa::UniversePtr universe;
    for (const auto& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + path);
        mfa::Partition p = mfa::read_partition_csv(in, universe, stem_label(path));
        if (!universe) universe = p.universe;
        // label carries the date when the file name ends in one
        std::string stem = p.label;
        if (stem.size() >= 10) {
            try {
                p.date = mfa::parse_date(stem.substr(stem.size() - 10));
            } catch (const mfa::ParseError&) {
            }
        }
        parts.push_back(std::move(p));
    }
    return parts;
}

struct SynthArgs {
    std::string spec_path;
    std::string out_dir;
    std::optional<uint64_t> seed;
};

int run_synth(const SynthArgs& args) {
    std::ifstream in(args.spec_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + args.spec_path);
    mfa::synth::Spec spec = mfa::synth::parse_spec(in);
    if (args.seed) spec.seed = *args.seed;

    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);
    std::vector<std::string> outputs;

    auto odm = mfa::synth::gen_odm_series(spec);
    {
        auto out = open_out(dir / "odm.csv");
        mfa::write_odm_csv(out, odm);
        outputs.push_back("odm.csv");
    }

    mfa::UniversePtr universe = odm.front().universe;
    mfa::Partition planted = mfa::synth::planted_partition(spec, universe, spec.start);
    mfa::synth::CaseData cases = mfa::synth::gen_cases(spec, planted);
    mfa::ZoneFrame zones = mfa::synth::zone_frame(spec, planted);

    {
        auto out = open_out(dir / "zones.csv");
        mfa::write_zones_csv(out, zones);
        outputs.push_back("zones.csv");
    }
    {
        auto out = open_out(dir / "district_cases.csv");
        mfa::write_district_cases_csv(out, cases.district_cases7);
        outputs.push_back("district_cases.csv");
    }
    {
        auto out = open_out(dir / "zone_cases.csv");
        mfa::write_zone_cases_csv(out, *universe, cases);
        outputs.push_back("zone_cases.csv");
    }
    for (const auto& regime : spec.regimes) {
        mfa::Partition p = mfa::synth::planted_partition(spec, universe, regime.start);
        std::string name = "planted_" + mfa::to_string(regime.start) + ".csv";
        auto out = open_out(dir / name);
        mfa::write_partition_csv(out, p);
        outputs.push_back(name);
    }

    json params = {{"seed", spec.seed},
                   {"areas", spec.n_areas},
                   {"start", mfa::to_string(spec.start)},
                   {"end", mfa::to_string(spec.end)}};
    write_manifest(dir, "synth", params, {args.spec_path}, outputs);
    return 0;
}

struct MfaArgs {
    std::string odm_path;
    std::string out_dir;
    double threshold = 0.15;
    bool strict = false;
    int walk_length = 4;
    bool weekdays_only = false;
    std::string holidays_path;
    bool exclude_diagonal = false;
    std::string before;
    std::vector<std::string> between;
    bool write_json = false;
    int jobs = 1;
};

int run_mfa(const MfaArgs& args) {
    std::ifstream in(args.odm_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + args.odm_path);
    std::vector<mfa::DailyOdm> days = mfa::load_odm(in);

    std::vector<std::string> inputs{args.odm_path};
    std::set<mfa::Date> holidays;
    if (!args.holidays_path.empty()) {
        std::ifstream hin(args.holidays_path, std::ios::binary);
        if (!hin) throw std::runtime_error("cannot open " + args.holidays_path);
        std::string line;
        long n = 0;
        while (std::getline(hin, line)) {
            ++n;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            holidays.insert(mfa::parse_date(line, n));
        }
        inputs.push_back(args.holidays_path);
    }
    if (args.weekdays_only || !holidays.empty())
        days = mfa::weekday_filter(std::move(days), holidays);

    if (!args.before.empty()) {
        mfa::Date cutoff = mfa::parse_date(args.before);
        std::erase_if(days, [&](const mfa::DailyOdm& d) { return !(d.date < cutoff); });
    }
    if (!args.between.empty()) {
        mfa::Date lo = mfa::parse_date(args.between.at(0));
        mfa::Date hi = mfa::parse_date(args.between.at(1));
        if (hi < lo) throw std::invalid_argument("--between: end before start");
        std::erase_if(days,
                      [&](const mfa::DailyOdm& d) { return d.date < lo || hi < d.date; });
    }

    double threshold = args.strict ? 0.30 : args.threshold;
    mfa::MfaParams params{threshold, args.walk_length, !args.exclude_diagonal};
    auto results = mfa::daily_mfa_details(days, params, args.jobs);

    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);
    std::vector<std::string> outputs;
    json day_rows = json::array();
    {
        auto summary = open_out(dir / "days.csv");
        summary << "date,n_mfas,n_residual,modularity,file\n";
        for (size_t i = 0; i < results.size(); ++i) {
            std::string date = mfa::to_string(days[i].date);
            std::string name = "mfa_" + date + ".csv";
            auto out = open_out(dir / name);
            mfa::write_partition_csv(out, results[i].partition);
            outputs.push_back(name);
            if (args.write_json) {
                std::string jname = "mfa_" + date + ".json";
                auto jout = open_out(dir / jname);
                jout << mfa::partition_json(results[i].partition, results[i].modularity)
                            .dump(2)
                     << '\n';
                outputs.push_back(jname);
            }
            summary << date << ',' << results[i].n_groups << ','
                    << results[i].n_residual << ','
                    << mfa::format_double(results[i].modularity) << ',' << name << '\n';
            day_rows.push_back({{"date", date},
                                {"n_mfas", results[i].n_groups},
                                {"n_residual", results[i].n_residual},
                                {"modularity", results[i].modularity}});
        }
        outputs.push_back("days.csv");
    }

    json params_json = {{"threshold", threshold},
                        {"walk_length", args.walk_length},
                        {"weekdays_only", args.weekdays_only},
                        {"include_diagonal", !args.exclude_diagonal},
                        {"days", day_rows}};
    if (!args.before.empty()) params_json["before"] = args.before;
    if (!args.between.empty())
        params_json["between"] = {args.between.at(0), args.between.at(1)};
    write_manifest(dir, "mfa", params_json, inputs, outputs);
    return 0;
}

struct SimilarityArgs {
    std::vector<std::string> partition_paths;
    std::string out_dir;
    bool exclude_residual = false;
    std::string admin_path; // area_id,gkz mapping
};

int run_similarity(const SimilarityArgs& args) {
    auto parts = load_partitions(args.partition_paths);
    mfa::SimilarityOptions opts{!args.exclude_residual};

    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);
    std::vector<std::string> outputs;
    std::vector<std::string> inputs = args.partition_paths;
    std::sort(inputs.begin(), inputs.end());

    mfa::SimilarityMatrix matrix = mfa::similarity_matrix(parts, opts);
    {
        auto out = open_out(dir / "matrix.csv");
        mfa::write_similarity_csv(out, matrix);
        outputs.push_back("matrix.csv");
    }
    {
        auto out = open_out(dir / "pairs.csv");
        mfa::write_similarity_long_csv(out, matrix);
        outputs.push_back("pairs.csv");
    }
    bool all_dated = true;
    for (const auto& p : parts) all_dated = all_dated && p.date.has_value();
    if (all_dated && !parts.empty()) {
        auto out = open_out(dir / "intraweek.csv");
        mfa::write_intraweek_csv(out, mfa::intraweek_series(parts, opts));
        outputs.push_back("intraweek.csv");
    }
    if (!args.admin_path.empty()) {
        std::ifstream rin(args.admin_path, std::ios::binary);
        if (!rin) throw std::runtime_error("cannot open " + args.admin_path);
        mfa::Partition admin =
            mfa::read_district_partition_csv(rin, parts.front().universe);
        auto out = open_out(dir / "admin.csv");
        mfa::write_admin_comparison_csv(out, mfa::compare_to_admin(parts, admin, opts));
        outputs.push_back("admin.csv");
        inputs.push_back(args.admin_path);
    }

    json params = {{"include_residual", !args.exclude_residual}};
    write_manifest(dir, "similarity", params, inputs, outputs);
    return 0;
}

struct ConsensusArgs {
    std::vector<std::string> partition_paths;
    std::string out_dir;
    double cut = 0.5;
    int walk_length = 4;
    bool residual_together = false;
    bool write_co = false;
    std::string before;
    std::vector<std::string> between;
    std::string geometry_path;
    std::string geometry_key = "area_id";
};

int run_consensus(const ConsensusArgs& args) {
    auto parts = load_partitions(args.partition_paths);
    if (!args.before.empty() || !args.between.empty()) {
        for (const auto& p : parts)
            if (!p.date)
                throw std::invalid_argument(
                    "date filters need dated partition files (…_YYYY-MM-DD.csv)");
        if (!args.before.empty()) {
            mfa::Date cutoff = mfa::parse_date(args.before);
            std::erase_if(parts,
                          [&](const mfa::Partition& p) { return !(*p.date < cutoff); });
        }
        if (!args.between.empty()) {
            mfa::Date lo = mfa::parse_date(args.between.at(0));
            mfa::Date hi = mfa::parse_date(args.between.at(1));
            if (hi < lo) throw std::invalid_argument("--between: end before start");
            std::erase_if(parts, [&](const mfa::Partition& p) {
                return *p.date < lo || hi < *p.date;
            });
        }
        if (parts.empty())
            throw std::invalid_argument("no partitions left after date filtering");
    }
    mfa::ConsensusOptions opts{args.residual_together};

    mfa::CoAssociation co = mfa::co_association(parts, opts);
    mfa::AdjacencyMatrix adj = mfa::binarize(co, args.cut);
    mfa::MobilityGraph graph = mfa::build_graph(adj);
    mfa::Partition persistent = mfa::collapse_singletons(
        mfa::cut_at_max_modularity(mfa::walktrap(graph, args.walk_length), "persistent"));

    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);
    std::vector<std::string> outputs;
    std::vector<std::string> inputs = args.partition_paths;
    std::sort(inputs.begin(), inputs.end());

    {
        auto out = open_out(dir / "persistent.csv");
        mfa::write_partition_csv(out, persistent);
        outputs.push_back("persistent.csv");
    }
    if (args.write_co) {
        auto out = open_out(dir / "cofrequency.csv");
        mfa::write_cofrequency_csv(out, co);
        outputs.push_back("cofrequency.csv");
    }
    if (!args.geometry_path.empty()) {
        json doc = json::parse(mfa::read_file(args.geometry_path));
        mfa::geojson_join(doc, persistent, args.geometry_key);
        auto out = open_out(dir / "persistent.geojson");
        out << doc.dump(2) << '\n';
        outputs.push_back("persistent.geojson");
        inputs.push_back(args.geometry_path);
    }

    json params = {{"cut", args.cut},
                   {"walk_length", args.walk_length},
                   {"residual_co_membership", args.residual_together},
                   {"ensemble_size", co.ensemble_size},
                   {"n_mfas", persistent.num_groups},
                   {"n_residual", persistent.residual_size()}};
    if (!args.before.empty()) params["before"] = args.before;
    if (!args.between.empty())
        params["between"] = {args.between.at(0), args.between.at(1)};
    write_manifest(dir, "consensus", params, inputs, outputs);
    return 0;
}

struct StatsArgs {
    std::string zones_path;
    std::string cases_path;
    std::string partition_path;
    std::string out_dir;
    int window = 0; // 0 = input already holds 7-day sums
    bool drop_zero_rows = false;
    double alpha = 0.01;
    std::vector<std::string> dates;
    bool write_zone_cases = false;
};

int run_stats(const StatsArgs& args) {
    std::ifstream zin(args.zones_path, std::ios::binary);
    if (!zin) throw std::runtime_error("cannot open " + args.zones_path);
    mfa::ZoneFrame zones = mfa::read_zones_csv(zin);

    std::ifstream pin(args.partition_path, std::ios::binary);
    if (!pin) throw std::runtime_error("cannot open " + args.partition_path);
    mfa::Partition partition =
        mfa::read_partition_csv(pin, zones.zones, stem_label(args.partition_path));
    zones.apply_partition(partition);

    std::ifstream cin_(args.cases_path, std::ios::binary);
    if (!cin_) throw std::runtime_error("cannot open " + args.cases_path);
    mfa::DistrictCases cases = mfa::read_district_cases_csv(cin_);
    if (args.window > 0) cases = mfa::window_sum(cases, args.window);
    zones = mfa::redistribute_cases(cases, std::move(zones));

    std::vector<mfa::Date> dates;
    if (args.dates.empty()) {
        dates = zones.dates;
    } else {
        for (const auto& d : args.dates) dates.push_back(mfa::parse_date(d));
        std::sort(dates.begin(), dates.end());
    }

    mfa::FitOptions fit_opts{args.drop_zero_rows, args.alpha};
    mfa::CoefficientTimeline timeline = mfa::coefficient_timeline(zones, dates, fit_opts);
    auto weekly = mfa::weekly_eta_table(zones, partition);
    auto summary = mfa::summarize_mfas(zones, partition, timeline.grid);

    fs::create_directories(args.out_dir);
    fs::path dir(args.out_dir);
    std::vector<std::string> outputs;
    {
        auto out = open_out(dir / "weekly_eta.csv");
        mfa::write_weekly_eta_csv(out, weekly);
        outputs.push_back("weekly_eta.csv");
    }
    {
        auto out = open_out(dir / "coefficients.csv");
        mfa::write_coefficients_csv(out, timeline.points, false);
        outputs.push_back("coefficients.csv");
    }
    {
        auto out = open_out(dir / "coefficients_ri.csv");
        mfa::write_coefficients_csv(out, timeline.points, true);
        outputs.push_back("coefficients_ri.csv");
    }
    {
        auto out = open_out(dir / "models.csv");
        mfa::write_models_csv(out, timeline.points);
        outputs.push_back("models.csv");
    }
    {
        auto out = open_out(dir / "grid.csv");
        mfa::write_grid_csv(out, timeline.grid);
        outputs.push_back("grid.csv");
    }
    {
        auto out = open_out(dir / "summary.csv");
        mfa::write_summary_csv(out, summary);
        outputs.push_back("summary.csv");
    }
    if (args.write_zone_cases) {
        auto out = open_out(dir / "zone_cases.csv");
        out << "area_id,date,cases_7d\n";
        for (size_t t = 0; t < zones.dates.size(); ++t)
            for (int32_t i = 0; i < zones.zones->size(); ++i) {
                mfa::write_csv_field(out, zones.zones->id(i));
                out << ',' << mfa::to_string(zones.dates[t]) << ','
                    << mfa::format_double(zones.cases7[t][static_cast<size_t>(i)])
                    << '\n';
            }
        outputs.push_back("zone_cases.csv");
    }

    int failed = 0;
    for (const auto& pt : timeline.points) failed += pt.error.empty() ? 0 : 1;
    json params = {{"window", args.window},
                   {"drop_zero_rows", args.drop_zero_rows},
                   {"alpha", args.alpha},
                   {"n_dates", dates.size()},
                   {"n_failed_dates", failed}};
    write_manifest(dir, "stats", params,
                   {args.zones_path, args.cases_path, args.partition_path}, outputs);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mobility functional areas from origin-destination matrices"};
    app.set_version_flag("--version", std::string("mfa ") + kVersion);
    app.set_config("--config", "", "read options from a config file");
    app.require_subcommand(1);

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->configurable();
    synth->add_option("--spec", synth_args.spec_path, "spec file (key = value)")
        ->required();
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--seed", synth_args.seed, "override the spec seed");

    MfaArgs mfa_args;
    auto* detect = app.add_subcommand("mfa", "detect daily mobility functional areas");
    detect->configurable();
    detect->add_option("--odm", mfa_args.odm_path, "origin-destination CSV")->required();
    detect->add_option("--out", mfa_args.out_dir, "output directory")->required();
    auto* thr = detect->add_option("--threshold", mfa_args.threshold,
                                   "proximity threshold in (0,1)")
                    ->capture_default_str();
    detect->add_flag("--strict", mfa_args.strict, "use the strict 0.30 threshold")
        ->excludes(thr);
    detect->add_option("--walk-length", mfa_args.walk_length, "random walk length")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    detect->add_flag("--weekdays-only", mfa_args.weekdays_only,
                     "drop Saturdays and Sundays");
    detect->add_option("--holidays", mfa_args.holidays_path,
                       "file with one YYYY-MM-DD per line to drop");
    detect->add_flag("--exclude-diagonal", mfa_args.exclude_diagonal,
                     "leave self-loops out of the row denominator");
    auto* before = detect->add_option("--before", mfa_args.before,
                                      "keep days strictly before this date");
    detect->add_option("--between", mfa_args.between,
                       "keep days between two dates (inclusive)")
        ->expected(2)
        ->excludes(before);
    detect->add_flag("--json", mfa_args.write_json,
                     "also write each partition as JSON with member lists and Q");
    detect->add_option("--jobs", mfa_args.jobs, "worker threads")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    SimilarityArgs sim_args;
    auto* sim = app.add_subcommand("similarity", "compare partitions");
    sim->configurable();
    sim->add_option("partitions", sim_args.partition_paths, "partition CSV files")
        ->required();
    sim->add_option("--out", sim_args.out_dir, "output directory")->required();
    sim->add_flag("--exclude-residual", sim_args.exclude_residual,
                  "ignore residual areas in the comparison");
    sim->add_option("--admin", sim_args.admin_path,
                    "area_id,gkz mapping to compare against");

    ConsensusArgs cons_args;
    auto* cons = app.add_subcommand("consensus", "persistent areas over an ensemble");
    cons->configurable();
    cons->add_option("partitions", cons_args.partition_paths, "partition CSV files")
        ->required();
    cons->add_option("--out", cons_args.out_dir, "output directory")->required();
    cons->add_option("--cut", cons_args.cut, "co-association frequency cut in (0,1]")
        ->capture_default_str();
    cons->add_option("--walk-length", cons_args.walk_length, "random walk length")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cons->add_flag("--residual-together", cons_args.residual_together,
                   "count shared residual membership as co-association");
    cons->add_flag("--write-co", cons_args.write_co, "write the co-association matrix");
    auto* cons_before = cons->add_option(
        "--before", cons_args.before, "use only partitions dated strictly before this");
    cons->add_option("--between", cons_args.between,
                     "use only partitions dated between two dates (inclusive)")
        ->expected(2)
        ->excludes(cons_before);
    cons->add_option("--geometry", cons_args.geometry_path,
                     "GeoJSON whose features get an mfa_id property");
    cons->add_option("--geometry-key", cons_args.geometry_key,
                     "feature property holding the area id")
        ->capture_default_str();

    StatsArgs stats_args;
    auto* stats = app.add_subcommand("stats", "epidemic association statistics");
    stats->configurable();
    stats->add_option("--zones", stats_args.zones_path,
                      "zone table (area_id,gkz,population)")
        ->required();
    stats->add_option("--cases", stats_args.cases_path,
                      "district case table (gkz,date,cases_7d)")
        ->required();
    stats->add_option("--partition", stats_args.partition_path, "MFA partition CSV")
        ->required();
    stats->add_option("--out", stats_args.out_dir, "output directory")->required();
    stats->add_option("--window", stats_args.window,
                      "input cases are daily; apply a trailing N-day sum")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    stats->add_flag("--drop-zero-rows", stats_args.drop_zero_rows,
                    "drop zones with a zero 7-day count from the fits");
    stats->add_option("--alpha", stats_args.alpha, "significance level")
        ->capture_default_str();
    stats->add_option("--dates", stats_args.dates, "fit only these dates");
    stats->add_flag("--write-zone-cases", stats_args.write_zone_cases,
                    "write the redistributed zone-level cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(synth)) return run_synth(synth_args);
        if (app.got_subcommand(detect)) return run_mfa(mfa_args);
        if (app.got_subcommand(sim)) return run_similarity(sim_args);
        if (app.got_subcommand(cons)) return run_consensus(cons_args);
        if (app.got_subcommand(stats)) return run_stats(stats_args);
    } catch (const mfa::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const mfa::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
