#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cyclestab/analysis.hpp"
#include "cyclestab/errors.hpp"
#include "cyclestab/io.hpp"

using namespace cyclestab;

namespace {

std::vector<BigDec> parse_list(const std::string& text) {
    std::vector<BigDec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(BigDec::from_string(item));
    if (out.empty()) throw ValidationError("empty coefficient list");
    return out;
}

int cmd_run(const std::string& manifest_path, const RunOverrides& ov) {
    RunManifest m = load_manifest(manifest_path, ov);
    RunSummary s = run_manifest(m);
    for (const auto& r : s.reports) {
        std::cout << r.label << ": " << r.status;
        for (const auto& c : r.cycles)
            if (c.record.verified)
                std::cout << " [state " << c.record.initial_index << ", sweep " << c.record.sweep << ", x = "
                          << c.record.points[0][0].to_short_string(20) << ", " << verdict_name(c.report.verdict) << "]";
        std::cout << "\n";
    }
    std::cout << "wrote " << s.files.size() << " files to " << m.output_dir.string() << "\n";
    return s.exit_code;
}

int cmd_list_maps(bool as_json) {
    const auto& maps = catalog().maps();
    if (as_json) {
        std::cout << "[\n";
        for (std::size_t i = 0; i < maps.size(); ++i) {
            const auto& m = maps[i];
            std::cout << "  {\"name\": \"" << m.name() << "\", \"dimension\": " << m.dimension() << ", \"periods\": [";
            for (std::size_t k = 0; k < m.presets().size(); ++k)
                std::cout << (k ? ", " : "") << m.presets()[k].period;
            std::cout << "]}" << (i + 1 < maps.size() ? "," : "") << "\n";
        }
        std::cout << "]\n";
        return kExitOk;
    }
    for (const auto& m : maps) {
        std::cout << m.name() << " (m=" << m.dimension() << ")";
        for (std::size_t k = 0; k < m.parameter_names().size(); ++k)
            std::cout << " " << m.parameter_names()[k] << "=" << m.parameter_values()[k].to_short_string(10);
        std::cout << "\n  presets:";
        for (const auto& p : m.presets())
            std::cout << " T=" << p.period << " theta=" << p.theta.to_short_string(6) << (p.tested ? "" : " (untested)")
                      << ";";
        std::cout << "\n";
    }
    return kExitOk;
}

int cmd_analyze(const std::string& file, const std::string& map_name, int period, const std::string& theta,
                const std::string& coefficients, int P) {
    PrecisionGuard g(P);
    const MapDef& map = catalog().find(map_name);
    std::vector<State> cycle = load_cycle_file(file);
    for (const auto& s : cycle)
        if (static_cast<int>(s.size()) != map.dimension())
            throw ValidationError("cycle points do not match the dimension of map '" + map.name() + "'");
    if (theta.empty() == coefficients.empty()) throw ValidationError("give exactly one of --theta or --coefficients");
    ControlPolynomial poly = theta.empty() ? ControlPolynomial(parse_list(coefficients))
                                           : ControlPolynomial::from_scalar_theta(BigDec::from_string(theta));
    StabilityReport rep = stability_verdict(map, cycle, poly, period);
    std::cout << stability_report_to_json(rep);
    return kExitOk;
}

int cmd_verify_lemma1(int trials, std::uint64_t seed, int P) {
    PrecisionGuard g(P);
    Lemma1Summary s = verify_lemma1(trials, seed);
    for (std::size_t i = 0; i < s.trials.size(); ++i)
        std::cout << "trial " << i << ": T=" << s.trials[i].factors.size() << " N=" << s.trials[i].theta.size()
                  << " residual=" << s.trials[i].residual.to_short_string(3) << "\n";
    std::cout << "max residual " << s.max_residual.to_short_string(3) << " (tolerance " << s.tolerance.to_short_string(3)
              << "): " << (s.passed ? "pass" : "FAIL") << "\n";
    return s.passed ? kExitOk : kExitDivergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Find and stabilize unstable cycles of discrete maps with predictive control"};
    app.require_subcommand(1);

    std::string manifest;
    RunOverrides ov;
    int run_precision = 0, run_jobs = 0;
    std::string run_output, stop_flag;
    auto* run = app.add_subcommand("run", "Run the searches of a JSON manifest");
    run->add_option("manifest", manifest, "Manifest file")->required();
    run->add_option("--precision", run_precision, "Override the manifest precision")->check(CLI::Range(kMinimumPrecision, 100000));
    run->add_option("--output-dir", run_output, "Override the output directory");
    run->add_option("--stop-on-first", stop_flag, "Override stop-on-first-find")->check(CLI::IsMember({"true", "false"}));
    run->add_option("--jobs", run_jobs, "Searches run concurrently")->check(CLI::PositiveNumber);

    bool as_json = false;
    auto* list = app.add_subcommand("list-maps", "List the map catalog");
    list->add_flag("--json", as_json, "JSON output");

    std::string cycle_file, map_name, theta, coefficients;
    int period = 0, analyze_precision = 0;
    auto* analyze = app.add_subcommand("analyze", "Stability report for a cycle file (CSV or result JSON)");
    analyze->add_option("cycle-file", cycle_file, "Cycle file")->required();
    analyze->add_option("--map", map_name, "Map name")->required();
    analyze->add_option("--period", period, "Period T")->required()->check(CLI::PositiveNumber);
    analyze->add_option("--theta", theta, "Scalar theta of the two-term scheme");
    analyze->add_option("--coefficients", coefficients, "Comma-separated theta_1..theta_N");
    analyze->add_option("--precision", analyze_precision, "Working precision")->check(CLI::Range(kMinimumPrecision, 100000));

    int trials = 50, lemma_precision = 50;
    std::uint64_t seed = 1;
    auto* lemma = app.add_subcommand("verify-lemma1", "Closed form vs chain-rule product on random cycles");
    lemma->add_option("--trials", trials, "Number of synthetic cycles")->check(CLI::PositiveNumber);
    lemma->add_option("--seed", seed, "RNG seed");
    lemma->add_option("--precision", lemma_precision, "Working precision")->check(CLI::Range(kMinimumPrecision, 100000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*run) {
            if (run_precision) ov.precision = run_precision;
            if (!run_output.empty()) ov.output_dir = run_output;
            if (!stop_flag.empty()) ov.stop_on_first = stop_flag == "true";
            if (run_jobs) ov.jobs = run_jobs;
            return cmd_run(manifest, ov);
        }
        if (*list) return cmd_list_maps(as_json);
        if (*analyze)
            return cmd_analyze(cycle_file, map_name, period, theta, coefficients,
                               analyze_precision ? analyze_precision : precision_from_environment());
        if (*lemma) return cmd_verify_lemma1(trials, seed, lemma_precision);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDivergence;
    }
    return kExitOk;
}
