// Command-line front end: replay scenarios against their expected outcome,
// batch-run a corpus, inject faults, and summarize score CSVs.
//
// Exit codes: 0 graded pass, 1 graded fail, 2 operational error.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "supervisor/supervisor.hpp"

namespace fs = std::filesystem;
using namespace supervisor;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

struct RunOutcome {
    std::string name;
    bool ok{false};        // loaded and replayed
    bool pass{false};
    std::string detail;
};

void apply_overrides(Scenario& sc, const std::vector<std::string>& sets) {
    for (const std::string& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ParseError("--set expects key=value, got '" + kv + "'");
        }
        apply_scenario_setting(sc, kv.substr(0, eq), kv.substr(eq + 1), "--set " + kv);
    }
}

/// Replays one scenario and writes <name>_scores.csv and <name>_report.txt.
RunOutcome run_scenario(const std::string& path, const fs::path& out_dir,
                        const std::vector<std::string>& sets, bool svg) {
    RunOutcome outcome;
    outcome.name = fs::path(path).stem().string();
    try {
        Scenario sc = load_scenario(path);
        apply_overrides(sc, sets);
        outcome.name = sc.name;

        const ReplayResult res = replay(sc);
        std::optional<SafetyEnvelope> envelope;
        if (sc.expected.kind == ExpectedKind::FireInEnvelope) {
            envelope = ground_truth_envelope(sc);
        }
        const GradeResult g = grade_scenario(sc, res.verdicts);
        const RunReport rep = build_run_report(sc, res, g, envelope);

        fs::create_directories(out_dir);
        {
            std::ofstream csv(out_dir / (sc.name + "_scores.csv"), std::ios::binary);
            write_scores_csv(csv, res.verdicts);
        }
        {
            std::ofstream txt(out_dir / (sc.name + "_report.txt"), std::ios::binary);
            write_report_txt(txt, rep);
        }
        if (svg) {
            std::ofstream img(out_dir / (sc.name + "_scores.svg"), std::ios::binary);
            write_scores_svg(img, res.verdicts);
        }
        outcome.ok = true;
        outcome.pass = g.pass;
        outcome.detail = g.reason;
    } catch (const std::exception& e) {
        outcome.detail = e.what();
    }
    return outcome;
}

int cmd_run(const std::string& path, const std::string& out_dir, const std::vector<std::string>& sets,
            bool svg) {
    const RunOutcome outcome = run_scenario(path, out_dir, sets, svg);
    if (!outcome.ok) {
        std::cerr << "error: " << outcome.detail << "\n";
        return kExitError;
    }
    std::cout << outcome.name << ": " << (outcome.pass ? "PASS" : "FAIL") << " (" << outcome.detail
              << ")\n";
    return outcome.pass ? kExitPass : kExitFail;
}

int cmd_batch(const std::string& dir, const std::string& out_dir, int jobs) {
    std::vector<std::string> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".scn") {
            files.push_back(entry.path().string());
        }
    }
    if (ec) {
        std::cerr << "error: cannot read directory " << dir << ": " << ec.message() << "\n";
        return kExitError;
    }
    if (files.empty()) {
        std::cerr << "error: no .scn scenarios in " << dir << "\n";
        return kExitError;
    }
    std::sort(files.begin(), files.end());

    std::vector<RunOutcome> outcomes(files.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(files.size())));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1)) {
                outcomes[i] = run_scenario(files[i], out_dir, {}, false);
            }
        });
    }
    for (std::thread& th : pool) {
        th.join();
    }

    int passed = 0;
    bool any_error = false;
    std::ostringstream summary;
    for (const RunOutcome& o : outcomes) {
        const char* tag = !o.ok ? "ERROR" : o.pass ? "PASS" : "FAIL";
        summary << o.name << ": " << tag << " (" << o.detail << ")\n";
        passed += o.ok && o.pass;
        any_error = any_error || !o.ok;
    }
    summary << passed << "/" << outcomes.size() << " scenarios pass\n";
    std::cout << summary.str();
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "summary.txt", std::ios::binary) << summary.str();
    if (any_error) {
        return kExitError;
    }
    return passed == static_cast<int>(outcomes.size()) ? kExitPass : kExitFail;
}

int cmd_inject(const std::string& path, const std::string& fault, double scale, double offset,
               double add, const std::string& out_path) {
    try {
        const Scenario sc = load_scenario(path);
        FaultSpec spec;
        if (fault == "friction-exceed") {
            spec = {FaultKind::FrictionExceed, scale};
        } else if (fault == "bound-collision") {
            spec = {FaultKind::BoundCollision, offset};
        } else if (fault == "rule-violation") {
            spec = {FaultKind::RuleViolation, add};
        } else {
            std::cerr << "error: unknown fault '" << fault << "'\n";
            return kExitError;
        }
        const Scenario faulty = inject_fault(sc, spec);
        save_scenario(faulty, out_path);
        std::cout << "wrote " << out_path << " (expected=" << faulty.expected.to_string() << ")\n";
        return kExitPass;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

/// Rebuilds a minimal verdict timeline from a scores CSV (for summarizing and
/// re-plotting without replaying).
std::vector<Verdict> read_scores_csv(std::istream& in) {
    std::vector<Verdict> verdicts;
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty scores file");
    }
    const std::vector<std::string> header = detail::split(detail::trim(line), ',');
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) {
            continue;
        }
        const std::vector<std::string> cols = detail::split(detail::trim(line), ',');
        if (cols.size() != header.size()) {
            throw ParseError("scores row " + std::to_string(row) + ": column count mismatch");
        }
        Verdict v;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::string& key = header[c];
            if (key == "t_abs") {
                v.t_abs = detail::parse_double(cols[c], "row " + std::to_string(row));
            } else if (key == "s_tot") {
                v.s_tot = detail::parse_long(cols[c], "row " + std::to_string(row)) != 0;
            } else if (key == "action") {
                // informational only
            } else {
                CheckResult res;
                res.name = key;
                res.margin = detail::parse_double(cols[c], "row " + std::to_string(row));
                res.safe = !(res.margin < 0.0);
                v.driving.checks.push_back(res);
            }
        }
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

int cmd_report(const std::string& csv_path, const std::string& svg_path) {
    try {
        std::ifstream in(csv_path, std::ios::binary);
        if (!in) {
            std::cerr << "error: cannot open " << csv_path << "\n";
            return kExitError;
        }
        const std::vector<Verdict> verdicts = read_scores_csv(in);
        std::optional<double> fire;
        for (const Verdict& v : verdicts) {
            if (!v.s_tot) {
                fire = v.t_abs;
                break;
            }
        }
        std::cout << "frames: " << verdicts.size() << "\n";
        std::cout << "first_fire: " << (fire ? detail::format_double(*fire) : std::string("none"))
                  << "\n";
        for (const char* col : kScoreColumns) {
            double lo = std::numeric_limits<double>::infinity();
            for (const Verdict& v : verdicts) {
                if (const CheckResult* c = v.driving.find(col)) {
                    lo = std::min(lo, c->margin);
                }
            }
            std::cout << "min_margin." << col << ": " << detail::format_double(lo) << "\n";
        }
        if (!svg_path.empty()) {
            std::ofstream img(svg_path, std::ios::binary);
            write_scores_svg(img, verdicts);
            std::cout << "wrote " << svg_path << "\n";
        }
        return kExitPass;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory safety supervisor: scenario replay and grading"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = ".", fault, out_path, csv_path, svg_path;
    std::vector<std::string> sets;
    bool svg = false;
    int jobs = 1;
    double scale = 1.0, offset = 0.0, add = 0.0;

    CLI::App* run = app.add_subcommand("run", "replay one scenario and grade it");
    run->add_option("scenario", scenario_path, "scenario file (.scn)")->required();
    run->add_option("-o,--out", out_dir, "output directory for CSV and report");
    run->add_option("--set", sets, "override a header key, e.g. rss.rho=0.4");
    run->add_flag("--svg", svg, "also write a score-timeline SVG");

    CLI::App* batch = app.add_subcommand("batch", "replay every .scn in a directory");
    batch->add_option("dir", scenario_path, "scenario directory")->required();
    batch->add_option("-o,--out", out_dir, "output directory");
    batch->add_option("-j,--jobs", jobs, "parallel scenario replays");

    CLI::App* inject = app.add_subcommand("inject", "write a fault-injected copy of a scenario");
    inject->add_option("scenario", scenario_path, "base scenario file")->required();
    inject->add_option("--fault", fault, "friction-exceed | bound-collision | rule-violation")
        ->required();
    inject->add_option("--scale", scale, "velocity scale for friction-exceed");
    inject->add_option("--offset", offset, "lateral offset [m] for bound-collision");
    inject->add_option("--add", add, "velocity addend [m/s] for rule-violation");
    inject->add_option("-o,--out", out_path, "output scenario path")->required();

    CLI::App* report = app.add_subcommand("report", "summarize a scores CSV");
    report->add_option("csv", csv_path, "scores CSV written by run/batch")->required();
    report->add_option("--svg", svg_path, "write a score-timeline SVG to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    if (run->parsed()) {
        return cmd_run(scenario_path, out_dir, sets, svg);
    }
    if (batch->parsed()) {
        return cmd_batch(scenario_path, out_dir, jobs);
    }
    if (inject->parsed()) {
        return cmd_inject(scenario_path, fault, scale, offset, add, out_path);
    }
    if (report->parsed()) {
        return cmd_report(csv_path, svg_path);
    }
    return kExitError;
}
