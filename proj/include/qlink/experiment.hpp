#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qlink/analysis.hpp"
#include "qlink/trainer.hpp"

namespace qlink {

struct AnalysisSettings {
  bool expressibility = false;
  int expressibility_samples = kExpressibilitySamples;
  int expressibility_bins = kExpressibilityBins;
  bool expressibility_reduced = false;
  bool variance = false;
  int variance_samples = kVarianceSamples;
  bool landscape = false;
  int landscape_grid = 200;
  double landscape_range = 3.0;
  std::vector<int> landscape_qubits;  // empty = every plan qubit count
};

struct ExperimentPlan {
  std::vector<AnsatzKind> architectures = {AnsatzKind::VANILLA,
                                           AnsatzKind::QLINK_FIXED,
                                           AnsatzKind::QLINK_ADAPTIVE};
  std::vector<int> qubit_counts = {5, 6, 7, 8, 9, 10};  // n_total labels
  int repeats = 5;
  TrainConfig train;  // per-run seeds are derived; config.seed is ignored
  AnalysisSettings analysis;
  std::string output_dir = "out";
  std::uint64_t base_seed = 42;
  double depth_scale = 1.0;  // depth = ceil(depth_for(n) * scale)
  bool share_inputs_across_architectures = true;
  int workers = 1;  // CLI-level execution knob; not part of the config hash
};

// Throws std::invalid_argument naming the offending field.
void validate_plan(const ExperimentPlan& plan);

ExperimentPlan plan_from_json(const nlohmann::json& doc);
nlohmann::json plan_to_json(const ExperimentPlan& plan);
ExperimentPlan load_plan(const std::filesystem::path& path);

// Hash of the scientific content only; output_dir and workers are execution
// details and do not change it.
std::string plan_config_hash(const ExperimentPlan& plan);

struct RunRecord {
  AnsatzKind architecture = AnsatzKind::VANILLA;
  int n_total = 0;
  int n_data = 0;
  int depth = 0;
  int repeat_index = 0;
  std::uint64_t seed = 0;
  int stop_iteration = 0;
  bool converged = false;
  double final_loss = 0.0;
  // Kept in runs/<id>.json only; records.csv stays reproducible byte-for-byte.
  double wall_time_seconds = 0.0;
};

std::string run_id(AnsatzKind architecture, int n_total, int repeat_index);
int plan_depth(const ExperimentPlan& plan, int n_total);
std::uint64_t run_seed(const ExperimentPlan& plan, AnsatzKind architecture,
                       int n_total, int repeat_index);
std::uint64_t input_state_seed(const ExperimentPlan& plan,
                               AnsatzKind architecture, int n_total,
                               int repeat_index);

// Executes the full grid: trains every (architecture, n_total, repeat),
// writes traces/<id>.csv|.json and runs/<id>.json as runs finish, then the
// enabled analyses per (architecture, n_total), and finally records.csv,
// summary.csv and results.csv. Completed triples found in runs/ are skipped.
// Progress goes to `log` when non-null.
std::vector<RunRecord> run_plan(const ExperimentPlan& plan,
                                std::ostream* log = nullptr);

struct SummaryRow {
  AnsatzKind architecture = AnsatzKind::VANILLA;
  int n_total = 0;
  int runs = 0;
  double mean_stop_iteration = 0.0;
  double std_stop_iteration = 0.0;  // population std: lone runs report 0
  double fraction_converged = 0.0;
  double mean_convergence_efficiency = 0.0;
};

// Groups by (architecture, n_total) in first-appearance order. Efficiency is
// the mean over runs of max_iterations / stop_iteration.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records,
                                  int max_iterations = 1500);

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<RunRecord>& records,
                       std::uint64_t base_seed, const std::string& config_hash);
std::vector<RunRecord> read_records_csv(const std::filesystem::path& path);
void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<SummaryRow>& rows,
                       std::uint64_t base_seed, const std::string& config_hash);

}  // namespace qlink
