#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "casolv/asymptotics.hpp"
#include "casolv/dhlv.hpp"
#include "casolv/series.hpp"

namespace casolv {

enum class ExperimentKind { VerifyIdentities, Asymptotics, Simulate, FullPipeline };
enum class ArithmeticMode { Exact, Float };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One experiment per config file; see README for the schema.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::VerifyIdentities;
    ArithmeticMode mode = ArithmeticMode::Exact;
    int M = 1;
    int m = 2;
    int n_max = 5;
    DeltaSchedule delta = DeltaSchedule::constant(Rational(1));
    std::optional<PoleModel> poles;
    std::vector<Rational> seed_row;  // explicit seed, alternative to poles
    std::vector<Rational> u0;        // explicit simulation seed
    std::vector<int> k_list{0};
    std::vector<int> j_list{1};
    FitTolerances fit_tol;
    ConvergenceOptions conv_opt;
    double identity_float_tol = 1e-6;  // relative, float-mode identity checks
    nlohmann::json echo;               // raw parsed config, echoed in the report

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string lhs;
    std::string rhs;
    std::string tolerance;  // "exact" or the numeric tolerance used
    std::string detail;
};

struct FitRecord {
    std::string indices;  // e.g. "k=0,j=2"
    AsymptoticFit fit;
};

struct CsvTable {
    std::vector<std::string> header;  // without the leading "n"
    std::vector<std::vector<std::string>> rows;
};

struct RunResult {
    nlohmann::json config_echo;
    std::vector<CheckResult> checks;
    std::vector<FitRecord> fits;
    CsvTable csv;
    bool all_pass = false;
};

RunResult run_experiment(const ExperimentConfig& config);

std::string report_json(const RunResult& result);
std::string report_csv(const RunResult& result);

// Writes report.json and trajectory.csv under out_dir (created if missing).
void write_report(const RunResult& result, const std::string& out_dir);

}  // namespace casolv
