#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cyclestab/analysis.hpp"
#include "cyclestab/engine.hpp"
#include "cyclestab/maps.hpp"

namespace cyclestab {

inline constexpr int kMinimumPrecision = 30;
inline constexpr int kDefaultPrecision = 250;
inline constexpr const char* kPrecisionEnv = "CYCLESTAB_PRECISION";

// Precision from the environment variable, else 250. Throws ValidationError on a bad value.
int precision_from_environment();

struct ThetaSchedule {
    BigDec theta0;
    int k_max = 0;
};

struct SearchEntry {
    std::string label;  // file stem, e.g. "01-burgers-T28"
    SearchConfig config;
    std::optional<ThetaSchedule> schedule;
};

struct RunManifest {
    int precision = kDefaultPrecision;
    std::filesystem::path output_dir;
    bool emit_plots = true;
    bool stop_on_first = true;
    int jobs = 1;  // searches run concurrently
    MapRegistry registry;
    std::vector<SearchEntry> searches;
};

struct RunOverrides {
    std::optional<int> precision;
    std::optional<std::filesystem::path> output_dir;
    std::optional<bool> stop_on_first;
    std::optional<int> jobs;
};

// Relative output paths resolve against base_dir. Throws ValidationError naming the bad entry.
RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir,
                           const RunOverrides& overrides = {});
RunManifest load_manifest(const std::filesystem::path& path, const RunOverrides& overrides = {});

struct CycleResult {
    CycleRecord record;
    StabilityReport report;
};

struct Attempt {
    BigDec theta;
    bool found = false;
    std::vector<StateResult> states;
};

// Everything written to one result file.
struct SearchReport {
    std::string label;
    std::string map;
    int period = 1;
    Scheme scheme = Scheme::ScalarTheta;
    int precision = kDefaultPrecision;
    BigDec epsilon;
    ControlPolynomial theta;
    std::optional<BigDec> scalar_theta;
    std::optional<ThetaSchedule> schedule;
    int max_sweeps = 0;
    int warmup = 0;
    bool stop_on_first = true;
    std::string status;  // found, not-found, divergence
    std::vector<StateResult> states;
    std::vector<CycleResult> cycles;
    std::vector<Attempt> attempts;
};

// Runs one entry at the current precision and analyzes every verified cycle.
SearchReport execute_search(const SearchEntry& entry);

std::string search_report_to_json(const SearchReport& report);
SearchReport search_report_from_json(const std::string& text);

std::string cycle_to_csv(const CycleRecord& record);
std::vector<State> cycle_from_csv(const std::string& text);
// CSV or result JSON (first verified cycle).
std::vector<State> load_cycle_file(const std::filesystem::path& path);

std::string stability_report_to_json(const StabilityReport& report, int indent = 2);

// Open-loop orbit of about 200 points per initial state, (x, y) pairs (1-D maps use (x_n, x_(n+1))).
std::vector<std::pair<double, double>> background_orbit(const MapDef& map, const std::vector<State>& initial, int T);
std::string plot_csv(const MapDef& map, const CycleRecord& record, const std::vector<std::pair<double, double>>& bg);
std::string plot_svg(const MapDef& map, const CycleRecord& record, const std::vector<std::pair<double, double>>& bg);

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitDivergence = 2, kExitIo = 3 };

struct RunSummary {
    int exit_code = kExitOk;
    std::vector<std::string> files;
    std::vector<SearchReport> reports;
};

// Runs all searches, writes result files and summary.json (last). Throws IoError on write failures.
RunSummary run_manifest(const RunManifest& manifest);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace cyclestab
