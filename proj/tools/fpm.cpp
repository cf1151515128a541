// Command-line front end: run configured problems, benchmark cases and
// partition dry runs.

#include "fpm/bench.hpp"
#include "fpm/config.hpp"
#include "fpm/errors.hpp"
#include "fpm/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>

namespace {

using namespace fpm;

struct Options {
    std::string config;
    std::string bench_id;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> formats;
    bool dry_run = false;
};

std::string error_kind(const std::exception& e) {
#define FPM_KIND(T) \
    if (dynamic_cast<const T*>(&e)) return #T;
    FPM_KIND(DegenerateInput)
    FPM_KIND(EmptyCell)
    FPM_KIND(SingularSupport)
    FPM_KIND(InsufficientSupport)
    FPM_KIND(RootNotConverged)
    FPM_KIND(ZeroNormReference)
    FPM_KIND(InvalidProblem)
    FPM_KIND(InvalidPenalty)
    FPM_KIND(IllConditionedBasis)
    FPM_KIND(SingularIteration)
    FPM_KIND(Diverged)
    FPM_KIND(SchemaError)
    FPM_KIND(IoError)
    FPM_KIND(NotConverged)
#undef FPM_KIND
    return "Error";
}

int exit_code(const std::string& kind) {
    if (kind == "SchemaError" || kind == "IoError") return 2;
    return 3;
}

std::set<std::string> parse_formats(const std::vector<std::string>& list) {
    std::set<std::string> out;
    for (const auto& item : list) {
        std::stringstream ss(item);
        std::string f;
        while (std::getline(ss, f, ','))
            if (!f.empty()) {
                if (f != "csv" && f != "vtk" && f != "json") throw SchemaError("--format: unknown format '" + f + "'");
                out.insert(f);
            }
    }
    return out;
}

// Records whose times match the requested snapshots (all step ends if none).
std::vector<std::size_t> snapshot_records(const Trajectory& traj, const std::vector<double>& requested, double T) {
    std::vector<std::size_t> out;
    if (requested.empty()) {
        for (std::size_t k = 0; k < traj.times.size(); ++k)
            if (k == 0 || traj.interval_end[k]) out.push_back(k);
        return out;
    }
    const double tol = 1e-9 * std::max(1.0, T);
    for (double t : requested) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < traj.times.size(); ++k)
            if (std::abs(traj.times[k] - t) < std::abs(traj.times[best] - t)) best = k;
        if (std::abs(traj.times[best] - t) > tol) {
            std::ostringstream msg;
            msg << "snapshot time " << t << " is not a computed time level";
            throw SchemaError(msg.str());
        }
        out.push_back(best);
    }
    return out;
}

void write_partition(const Discretization& disc, const std::filesystem::path& dir, const std::string& name) {
    Vector flag(static_cast<Eigen::Index>(disc.size()));
    for (std::size_t i = 0; i < disc.size(); ++i) flag(static_cast<Eigen::Index>(i)) = disc.points.boundary[i];
    auto out = open_output(dir / (name + ".vtk"));
    write_vtk(out, disc.partition, {{"boundary_point", flag}});
}

nlohmann::json partition_summary(const Discretization& disc) {
    std::map<std::string, int> kinds;
    for (const auto& f : disc.partition.faces) ++kinds[to_string(f.kind)];
    double volume = 0.0;
    for (const auto& c : disc.partition.cells) volume += c.volume;
    return {{"points", disc.size()},
            {"dim", disc.dim()},
            {"faces", disc.partition.faces.size()},
            {"face_kinds", kinds},
            {"cell_volume_sum", volume},
            {"domain_volume", disc.partition.domain_volume}};
}

int cmd_partition(const Options& opt) {
    RunConfig cfg = parse_config(opt.config);
    const std::filesystem::path dir = opt.out.empty() ? cfg.output.directory : std::filesystem::path(opt.out);
    const BenchmarkCase bc = build_case(cfg, opt.seed);
    const Discretization disc = discretize(bc.points, bc.domain, bc.problem, bc.assembly.he_policy);
    write_partition(disc, dir, "partition");
    std::cout << partition_summary(disc).dump(2) << '\n';
    return 0;
}

int cmd_run(const Options& opt) {
    if (opt.dry_run) return cmd_partition(opt);
    RunConfig cfg = parse_config(opt.config);
    if (!opt.out.empty()) cfg.output.directory = opt.out;
    if (!opt.formats.empty()) cfg.output.formats = parse_formats(opt.formats);
    const BenchmarkCase bc = build_case(cfg, opt.seed);
    const CaseRun run = run_case(bc);
    const auto& dir = cfg.output.directory;
    const auto records = snapshot_records(run.trajectory, cfg.output.snapshots, bc.T);

    if (cfg.output.formats.count("csv")) {
        std::vector<double> times;
        std::vector<Vector> states;
        for (std::size_t k : records) {
            times.push_back(run.trajectory.times[k]);
            states.push_back(run.trajectory.states[k]);
        }
        auto out = open_output(dir / "temperature.csv");
        write_csv(out, run.disc.points, times, states);
    }
    if (cfg.output.formats.count("vtk")) {
        for (std::size_t s = 0; s < records.size(); ++s) {
            auto out = open_output(dir / ("temperature_" + std::to_string(s) + ".vtk"));
            write_vtk(out, run.disc.partition, {{"u", run.trajectory.states[records[s]]}});
        }
    }
    if (cfg.output.matrices) {
        auto c = open_output(dir / "C.mtx");
        write_matrix_market(c, run.system.C);
        auto k = open_output(dir / "K.mtx");
        write_matrix_market(k, run.system.K);
    }
    nlohmann::json report = run.report.to_json();
    nlohmann::json snaps = nlohmann::json::array();
    for (std::size_t k : records) snaps.push_back(run.trajectory.times[k]);
    report["snapshots"] = snaps;
    if (cfg.output.formats.count("json")) write_json(dir / "report.json", report);
    std::cout << format_table({run.report});
    return 0;
}

int cmd_bench(const Options& opt) {
    std::vector<std::string> ids;
    if (opt.bench_id == "all") ids = case_ids();
    else ids = {opt.bench_id};
    CaseOverrides ov;
    ov.seed = opt.seed;
    std::vector<ErrorReport> reports;
    nlohmann::json all = nlohmann::json::array();
    for (const auto& id : ids) {
        reports.push_back(run_benchmark(id, ov));
        all.push_back(reports.back().to_json());
    }
    std::cout << format_table(reports);
    if (!opt.out.empty()) write_json(std::filesystem::path(opt.out) / "bench.json", all);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meshless Fragile Points Method solver for transient heat conduction"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "Solve the problem described by a YAML config");
    run->add_option("config", opt.config, "Config file")->required();
    run->add_option("--out", opt.out, "Output directory (overrides the config)");
    run->add_option("--seed", seed, "Seed for random point layouts (overrides the config)");
    run->add_option("--format", opt.formats, "Comma-separated output formats: csv,vtk,json");
    run->add_flag("--dry-run", opt.dry_run, "Write the partition only, do not solve");

    auto* bench = app.add_subcommand("bench", "Run a registered benchmark case");
    bench->add_option("id", opt.bench_id, "Case id or 'all'")->required();
    bench->add_option("--out", opt.out, "Directory for bench.json");
    bench->add_option("--seed", seed, "Seed for random point layouts");
    bench->add_option("--format", opt.formats, "Accepted for symmetry with run; reports are JSON");

    auto* part = app.add_subcommand("partition", "Build and export the Voronoi partition only");
    part->add_option("config", opt.config, "Config file")->required();
    part->add_option("--out", opt.out, "Output directory (overrides the config)");
    part->add_option("--seed", seed, "Seed for random point layouts (overrides the config)");

    app.add_subcommand("list", "List registered benchmark cases");

    CLI11_PARSE(app, argc, argv);
    for (auto* sub : app.get_subcommands())
        if (const auto* o = sub->get_option_no_throw("--seed"); o && o->count() > 0) opt.seed = seed;

    try {
        if (*run) return cmd_run(opt);
        if (*bench) return cmd_bench(opt);
        if (*part) return cmd_partition(opt);
        for (const auto& id : case_ids()) std::cout << id << '\n';
        return 0;
    } catch (const std::exception& e) {
        const std::string kind = error_kind(e);
        std::cerr << nlohmann::json{{"error", kind}, {"message", e.what()}}.dump() << '\n';
        return exit_code(kind);
    }
}
