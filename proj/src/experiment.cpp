#include "qlink/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "qlink/ansatz.hpp"
#include "qlink/csv.hpp"
#include "qlink/objective.hpp"
#include "qlink/rng.hpp"
#include "qlink/version.hpp"

namespace fs = std::filesystem;

namespace qlink {

namespace {

// Salts separating the seed streams derived from base_seed.
enum : std::uint64_t {
  kSaltRun = 1,
  kSaltInput = 2,
  kSaltExpressibility = 3,
  kSaltVariance = 4,
  kSaltLandscape = 5,
};

std::uint64_t arch_id(AnsatzKind kind) {
  return static_cast<std::uint64_t>(kind);
}

struct ResultRow {
  AnsatzKind architecture;
  int n_total;
  int depth;
  std::string metric;
  double value;
  int n_samples;
  std::uint64_t seed;
};

void write_meta_line(std::ofstream& out, std::uint64_t seed,
                     const std::string& config_hash) {
  out << "# seed=" << seed << " config_hash=" << config_hash
      << " version=" << kVersion << "\n";
}

}  // namespace

void validate_plan(const ExperimentPlan& plan) {
  if (plan.architectures.empty()) {
    throw std::invalid_argument("plan.architectures: must not be empty");
  }
  if (plan.qubit_counts.empty()) {
    throw std::invalid_argument("plan.qubit_counts: must not be empty");
  }
  for (int n : plan.qubit_counts) {
    if (n < 2 || n > kMaxQubits) {
      throw std::invalid_argument("plan.qubit_counts: each count must be in [2, " +
                                  std::to_string(kMaxQubits) + "]");
    }
  }
  for (AnsatzKind k : plan.architectures) {
    if (k != AnsatzKind::VANILLA) {
      for (int n : plan.qubit_counts) {
        if (n < 3) {
          throw std::invalid_argument(
              "plan.qubit_counts: QLINK architectures need n_total >= 3");
        }
      }
    }
  }
  if (plan.repeats < 1) {
    throw std::invalid_argument("plan.repeats: must be >= 1");
  }
  if (plan.train.learning_rate <= 0.0) {
    throw std::invalid_argument("plan.train.learning_rate: must be > 0");
  }
  if (plan.train.max_iterations < 1) {
    throw std::invalid_argument("plan.train.max_iterations: must be >= 1");
  }
  if (plan.train.loss_threshold <= 0.0) {
    throw std::invalid_argument("plan.train.loss_threshold: must be > 0");
  }
  if (plan.depth_scale <= 0.0) {
    throw std::invalid_argument("plan.depth_scale: must be > 0");
  }
  if (plan.analysis.expressibility && plan.analysis.expressibility_samples < 1) {
    throw std::invalid_argument("plan.analysis.expressibility.samples: must be >= 1");
  }
  if (plan.analysis.expressibility && plan.analysis.expressibility_bins < 1) {
    throw std::invalid_argument("plan.analysis.expressibility.bins: must be >= 1");
  }
  if (plan.analysis.variance && plan.analysis.variance_samples < 2) {
    throw std::invalid_argument("plan.analysis.variance.samples: must be >= 2");
  }
  if (plan.analysis.landscape && plan.analysis.landscape_grid < 2) {
    throw std::invalid_argument("plan.analysis.landscape.grid_points: must be >= 2");
  }
  if (plan.analysis.landscape && plan.analysis.landscape_range <= 0.0) {
    throw std::invalid_argument("plan.analysis.landscape.range_limit: must be > 0");
  }
  if (plan.output_dir.empty()) {
    throw std::invalid_argument("plan.output_dir: must not be empty");
  }
  if (plan.workers < 1) {
    throw std::invalid_argument("plan.workers: must be >= 1");
  }
}

ExperimentPlan plan_from_json(const nlohmann::json& doc) {
  ExperimentPlan plan;
  if (doc.contains("architectures")) {
    plan.architectures.clear();
    for (const auto& item : doc.at("architectures")) {
      const auto kind = ansatz_from_name(item.get<std::string>());
      if (!kind) {
        throw std::invalid_argument("plan.architectures: unknown architecture '" +
                                    item.get<std::string>() + "'");
      }
      plan.architectures.push_back(*kind);
    }
  }
  if (doc.contains("qubit_counts")) {
    plan.qubit_counts = doc.at("qubit_counts").get<std::vector<int>>();
  }
  if (doc.contains("repeats")) plan.repeats = doc.at("repeats").get<int>();
  if (doc.contains("train")) {
    const auto& t = doc.at("train");
    if (t.contains("learning_rate")) {
      plan.train.learning_rate = t.at("learning_rate").get<double>();
    }
    if (t.contains("max_iterations")) {
      plan.train.max_iterations = t.at("max_iterations").get<int>();
    }
    if (t.contains("loss_threshold")) {
      plan.train.loss_threshold = t.at("loss_threshold").get<double>();
    }
  }
  if (doc.contains("analysis")) {
    const auto& a = doc.at("analysis");
    if (a.contains("expressibility")) {
      const auto& e = a.at("expressibility");
      plan.analysis.expressibility = e.value("enabled", false);
      plan.analysis.expressibility_samples =
          e.value("samples", kExpressibilitySamples);
      plan.analysis.expressibility_bins = e.value("bins", kExpressibilityBins);
      plan.analysis.expressibility_reduced = e.value("reduced", false);
    }
    if (a.contains("variance")) {
      const auto& v = a.at("variance");
      plan.analysis.variance = v.value("enabled", false);
      plan.analysis.variance_samples = v.value("samples", kVarianceSamples);
    }
    if (a.contains("landscape")) {
      const auto& l = a.at("landscape");
      plan.analysis.landscape = l.value("enabled", false);
      plan.analysis.landscape_grid = l.value("grid_points", 200);
      plan.analysis.landscape_range = l.value("range_limit", 3.0);
      if (l.contains("qubit_counts")) {
        plan.analysis.landscape_qubits =
            l.at("qubit_counts").get<std::vector<int>>();
      }
    }
  }
  if (doc.contains("output_dir")) {
    plan.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("base_seed")) {
    plan.base_seed = doc.at("base_seed").get<std::uint64_t>();
  }
  if (doc.contains("depth_scale")) {
    plan.depth_scale = doc.at("depth_scale").get<double>();
  }
  if (doc.contains("share_inputs_across_architectures")) {
    plan.share_inputs_across_architectures =
        doc.at("share_inputs_across_architectures").get<bool>();
  }
  validate_plan(plan);
  return plan;
}

nlohmann::json plan_to_json(const ExperimentPlan& plan) {
  nlohmann::json doc;
  nlohmann::json archs = nlohmann::json::array();
  for (AnsatzKind k : plan.architectures) archs.push_back(ansatz_name(k));
  doc["architectures"] = std::move(archs);
  doc["qubit_counts"] = plan.qubit_counts;
  doc["repeats"] = plan.repeats;
  doc["train"] = {{"learning_rate", plan.train.learning_rate},
                  {"max_iterations", plan.train.max_iterations},
                  {"loss_threshold", plan.train.loss_threshold}};
  doc["analysis"] = {
      {"expressibility",
       {{"enabled", plan.analysis.expressibility},
        {"samples", plan.analysis.expressibility_samples},
        {"bins", plan.analysis.expressibility_bins},
        {"reduced", plan.analysis.expressibility_reduced}}},
      {"variance",
       {{"enabled", plan.analysis.variance},
        {"samples", plan.analysis.variance_samples}}},
      {"landscape",
       {{"enabled", plan.analysis.landscape},
        {"grid_points", plan.analysis.landscape_grid},
        {"range_limit", plan.analysis.landscape_range},
        {"qubit_counts", plan.analysis.landscape_qubits}}}};
  doc["output_dir"] = plan.output_dir;
  doc["base_seed"] = plan.base_seed;
  doc["depth_scale"] = plan.depth_scale;
  doc["share_inputs_across_architectures"] =
      plan.share_inputs_across_architectures;
  return doc;
}

ExperimentPlan load_plan(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read plan file " + path.string());
  nlohmann::json doc;
  in >> doc;
  return plan_from_json(doc);
}

std::string plan_config_hash(const ExperimentPlan& plan) {
  nlohmann::json doc = plan_to_json(plan);
  doc.erase("output_dir");
  return hash_hex(fnv1a64(doc.dump()));
}

std::string run_id(AnsatzKind architecture, int n_total, int repeat_index) {
  std::ostringstream os;
  os << ansatz_label(architecture) << "_n";
  if (n_total < 10) os << '0';
  os << n_total << "_r" << repeat_index;
  return os.str();
}

int plan_depth(const ExperimentPlan& plan, int n_total) {
  const int full = depth_for(n_total);
  return std::max(1, static_cast<int>(std::ceil(full * plan.depth_scale)));
}

std::uint64_t run_seed(const ExperimentPlan& plan, AnsatzKind architecture,
                       int n_total, int repeat_index) {
  return mix_seed(plan.base_seed,
                  {kSaltRun, arch_id(architecture),
                   static_cast<std::uint64_t>(n_total),
                   static_cast<std::uint64_t>(repeat_index)});
}

std::uint64_t input_state_seed(const ExperimentPlan& plan,
                               AnsatzKind architecture, int n_total,
                               int repeat_index) {
  if (plan.share_inputs_across_architectures) {
    return mix_seed(plan.base_seed,
                    {kSaltInput, static_cast<std::uint64_t>(n_total),
                     static_cast<std::uint64_t>(repeat_index)});
  }
  return mix_seed(plan.base_seed,
                  {kSaltInput, static_cast<std::uint64_t>(n_total),
                   static_cast<std::uint64_t>(repeat_index),
                   arch_id(architecture)});
}

namespace {

struct TrainJob {
  AnsatzKind architecture;
  int n_total;
  int repeat_index;
};

RunRecord execute_train_job(const ExperimentPlan& plan, const TrainJob& job,
                            const std::string& config_hash, std::ostream* log,
                            std::mutex& log_mutex) {
  const std::string id = run_id(job.architecture, job.n_total, job.repeat_index);
  const fs::path out_dir(plan.output_dir);
  const fs::path record_path = out_dir / "runs" / (id + ".json");

  if (fs::exists(record_path)) {
    std::ifstream in(record_path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception&) {
      doc = nullptr;  // partial write from an interrupted run; redo
    }
    if (doc.is_object()) {
      if (doc.value("config_hash", "") != config_hash) {
        throw std::runtime_error("run record " + record_path.string() +
                                 " was produced by a different plan "
                                 "(config hash mismatch); use a clean output "
                                 "directory");
      }
      RunRecord rec;
      rec.architecture = job.architecture;
      rec.n_total = doc.at("n_total").get<int>();
      rec.n_data = doc.at("n_data").get<int>();
      rec.depth = doc.at("depth").get<int>();
      rec.repeat_index = doc.at("repeat_index").get<int>();
      rec.seed = doc.at("seed").get<std::uint64_t>();
      rec.stop_iteration = doc.at("stop_iteration").get<int>();
      rec.converged = doc.at("converged").get<bool>();
      rec.final_loss = doc.at("final_loss").get<double>();
      rec.wall_time_seconds = doc.at("wall_time_seconds").get<double>();
      if (log) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *log << "[skip] " << id << " (already complete)\n";
      }
      return rec;
    }
  }

  const int depth = plan_depth(plan, job.n_total);
  const CircuitSpec circuit =
      build_architecture(job.architecture, job.n_total, depth);
  const std::uint64_t seed =
      run_seed(plan, job.architecture, job.n_total, job.repeat_index);
  const std::uint64_t inp_seed =
      input_state_seed(plan, job.architecture, job.n_total, job.repeat_index);
  const StateVector input = random_state(job.n_total, inp_seed);

  TrainConfig config = plan.train;
  config.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  const TrainTrace trace = train(circuit, input, config);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  write_trace_csv(out_dir / "traces" / (id + ".csv"), trace, seed, config_hash);
  {
    nlohmann::json doc = trace_to_json(trace, config, circuit);
    doc["id"] = id;
    doc["input_seed"] = inp_seed;
    doc["config_hash"] = config_hash;
    std::ofstream out(out_dir / "traces" / (id + ".json"));
    out << doc.dump(2) << "\n";
  }

  RunRecord rec;
  rec.architecture = job.architecture;
  rec.n_total = job.n_total;
  rec.n_data = circuit.n_data;
  rec.depth = depth;
  rec.repeat_index = job.repeat_index;
  rec.seed = seed;
  rec.stop_iteration = trace.stop_iteration;
  rec.converged = trace.converged;
  rec.final_loss = trace.losses.back();
  rec.wall_time_seconds = wall;

  {
    nlohmann::json doc;
    doc["version"] = kVersion;
    doc["config_hash"] = config_hash;
    doc["id"] = id;
    doc["architecture"] = ansatz_name(job.architecture);
    doc["n_total"] = rec.n_total;
    doc["n_data"] = rec.n_data;
    doc["depth"] = rec.depth;
    doc["repeat_index"] = rec.repeat_index;
    doc["seed"] = rec.seed;
    doc["input_seed"] = inp_seed;
    doc["stop_iteration"] = rec.stop_iteration;
    doc["converged"] = rec.converged;
    doc["final_loss"] = rec.final_loss;
    doc["wall_time_seconds"] = rec.wall_time_seconds;
    const fs::path tmp = record_path.string() + ".tmp";
    std::ofstream out(tmp);
    out << doc.dump(2) << "\n";
    out.close();
    fs::rename(tmp, record_path);
  }

  if (log) {
    std::lock_guard<std::mutex> lock(log_mutex);
    *log << "[done] " << id << ": stop=" << rec.stop_iteration
         << (rec.converged ? " (converged)" : " (not converged)")
         << " final_loss=" << format_double(rec.final_loss) << " wall="
         << format_double(rec.wall_time_seconds) << "s\n";
  }
  return rec;
}

void print_cost_estimates(const ExperimentPlan& plan, std::ostream& log) {
  log << "plan: " << plan.architectures.size() << " architecture(s) x "
      << plan.qubit_counts.size() << " qubit count(s) x " << plan.repeats
      << " repeat(s) = "
      << plan.architectures.size() * plan.qubit_counts.size() * plan.repeats
      << " training runs\n";
  for (AnsatzKind arch : plan.architectures) {
    for (int n : plan.qubit_counts) {
      const int depth = plan_depth(plan, n);
      const CircuitSpec c = build_architecture(arch, n, depth);
      const double amp_ops_per_iter = 3.0 * c.instructions.size() *
                                      std::pow(2.0, c.n_total);
      log << "  " << ansatz_label(arch) << " n=" << n << ": depth " << depth
          << ", " << c.instructions.size() << " gates, " << c.param_count
          << " params, ~" << format_double(amp_ops_per_iter)
          << " amp-ops/iteration, <= " << plan.train.max_iterations
          << " iterations/run\n";
    }
  }
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records,
                                  int max_iterations) {
  if (records.empty()) {
    throw std::invalid_argument("summarize: no records");
  }
  std::vector<SummaryRow> rows;
  auto find_group = [&](AnsatzKind arch, int n) -> SummaryRow* {
    for (SummaryRow& r : rows) {
      if (r.architecture == arch && r.n_total == n) return &r;
    }
    return nullptr;
  };
  // group in first-appearance order
  for (const RunRecord& rec : records) {
    if (!find_group(rec.architecture, rec.n_total)) {
      rows.push_back(SummaryRow{rec.architecture, rec.n_total, 0, 0, 0, 0, 0});
    }
  }
  for (SummaryRow& row : rows) {
    double sum = 0.0, sum_sq = 0.0, eff = 0.0;
    int n = 0, converged = 0;
    for (const RunRecord& rec : records) {
      if (rec.architecture != row.architecture || rec.n_total != row.n_total) {
        continue;
      }
      ++n;
      sum += rec.stop_iteration;
      sum_sq += static_cast<double>(rec.stop_iteration) * rec.stop_iteration;
      eff += static_cast<double>(max_iterations) / rec.stop_iteration;
      if (rec.converged) ++converged;
    }
    row.runs = n;
    row.mean_stop_iteration = sum / n;
    const double var =
        std::max(0.0, sum_sq / n - row.mean_stop_iteration * row.mean_stop_iteration);
    row.std_stop_iteration = std::sqrt(var);
    row.fraction_converged = static_cast<double>(converged) / n;
    row.mean_convergence_efficiency = eff / n;
  }
  return rows;
}

void write_records_csv(const fs::path& path,
                       const std::vector<RunRecord>& records,
                       std::uint64_t base_seed,
                       const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_meta_line(out, base_seed, config_hash);
  out << "architecture,n_total,n_data,depth,repeat_index,seed,stop_iteration,"
         "converged,final_loss\n";
  for (const RunRecord& r : records) {
    out << ansatz_name(r.architecture) << ',' << r.n_total << ',' << r.n_data
        << ',' << r.depth << ',' << r.repeat_index << ',' << r.seed << ','
        << r.stop_iteration << ',' << (r.converged ? "true" : "false") << ','
        << format_double(r.final_loss) << "\n";
  }
}

std::vector<RunRecord> read_records_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<RunRecord> records;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw std::runtime_error("malformed records row: " + line);
    }
    RunRecord r;
    const auto kind = ansatz_from_name(fields[0]);
    if (!kind) throw std::runtime_error("unknown architecture: " + fields[0]);
    r.architecture = *kind;
    r.n_total = std::stoi(fields[1]);
    r.n_data = std::stoi(fields[2]);
    r.depth = std::stoi(fields[3]);
    r.repeat_index = std::stoi(fields[4]);
    r.seed = std::stoull(fields[5]);
    r.stop_iteration = std::stoi(fields[6]);
    r.converged = fields[7] == "true";
    r.final_loss = std::stod(fields[8]);
    records.push_back(r);
  }
  return records;
}

void write_summary_csv(const fs::path& path,
                       const std::vector<SummaryRow>& rows,
                       std::uint64_t base_seed,
                       const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_meta_line(out, base_seed, config_hash);
  out << "architecture,n_total,runs,mean_stop_iteration,std_stop_iteration,"
         "fraction_converged,mean_convergence_efficiency\n";
  for (const SummaryRow& r : rows) {
    out << ansatz_name(r.architecture) << ',' << r.n_total << ',' << r.runs
        << ',' << format_double(r.mean_stop_iteration) << ','
        << format_double(r.std_stop_iteration) << ','
        << format_double(r.fraction_converged) << ','
        << format_double(r.mean_convergence_efficiency) << "\n";
  }
}

std::vector<RunRecord> run_plan(const ExperimentPlan& plan, std::ostream* log) {
  validate_plan(plan);
  const std::string config_hash = plan_config_hash(plan);
  const fs::path out_dir(plan.output_dir);

  // I/O must fail before any compute.
  fs::create_directories(out_dir / "traces");
  fs::create_directories(out_dir / "runs");
  if (plan.analysis.landscape) fs::create_directories(out_dir / "landscape");
  {
    const fs::path probe = out_dir / ".write_probe";
    std::ofstream test(probe);
    if (!test) {
      throw std::runtime_error("output directory " + out_dir.string() +
                               " is not writable");
    }
    test.close();
    fs::remove(probe);
  }

  if (log) print_cost_estimates(plan, *log);

  std::vector<TrainJob> jobs;
  for (AnsatzKind arch : plan.architectures) {
    for (int n : plan.qubit_counts) {
      for (int r = 0; r < plan.repeats; ++r) jobs.push_back({arch, n, r});
    }
  }

  std::vector<RunRecord> records(jobs.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size() || failed.load()) break;
      try {
        records[k] = execute_train_job(plan, jobs[k], config_hash, log, log_mutex);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failure = e.what();
        failed.store(true);
        break;
      }
    }
  };
  const int n_workers =
      std::max(1, std::min<int>(plan.workers, static_cast<int>(jobs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(failure);

  write_records_csv(out_dir / "records.csv", records, plan.base_seed,
                    config_hash);
  write_summary_csv(out_dir / "summary.csv",
                    summarize(records, plan.train.max_iterations),
                    plan.base_seed, config_hash);

  // Analyses per (architecture, n_total); rows land in preallocated slots so
  // the results table is identical no matter how jobs are scheduled.
  const bool any_analysis = plan.analysis.expressibility ||
                            plan.analysis.variance || plan.analysis.landscape;
  if (any_analysis) {
    struct AnalysisJob {
      AnsatzKind architecture;
      int n_total;
    };
    std::vector<AnalysisJob> ajobs;
    for (AnsatzKind arch : plan.architectures) {
      for (int n : plan.qubit_counts) ajobs.push_back({arch, n});
    }
    std::vector<std::vector<ResultRow>> rows(ajobs.size());
    std::atomic<std::size_t> anext{0};
    auto aworker = [&]() {
      for (;;) {
        const std::size_t k = anext.fetch_add(1);
        if (k >= ajobs.size() || failed.load()) break;
        try {
          const AnalysisJob& job = ajobs[k];
          const int depth = plan_depth(plan, job.n_total);
          const CircuitSpec circuit =
              build_architecture(job.architecture, job.n_total, depth);
          if (plan.analysis.expressibility) {
            const std::uint64_t seed = mix_seed(
                plan.base_seed, {kSaltExpressibility, arch_id(job.architecture),
                                 static_cast<std::uint64_t>(job.n_total)});
            const auto est = estimate_expressibility(
                circuit, plan.analysis.expressibility_samples,
                plan.analysis.expressibility_bins, seed,
                plan.analysis.expressibility_reduced);
            rows[k].push_back({job.architecture, job.n_total, depth,
                               plan.analysis.expressibility_reduced
                                   ? "expressibility_reduced"
                                   : "expressibility",
                               est.kl_divergence, est.n_samples, seed});
            if (log) {
              std::lock_guard<std::mutex> lock(log_mutex);
              *log << "[analysis] expressibility " << ansatz_label(job.architecture)
                   << " n=" << job.n_total << ": "
                   << format_double(est.kl_divergence) << "\n";
            }
          }
          if (plan.analysis.variance) {
            const std::uint64_t seed = mix_seed(
                plan.base_seed, {kSaltVariance, arch_id(job.architecture),
                                 static_cast<std::uint64_t>(job.n_total)});
            const auto rep =
                gradient_variance(circuit, plan.analysis.variance_samples, seed);
            rows[k].push_back({job.architecture, job.n_total, depth,
                               "gradient_variance", rep.variance, rep.n_samples,
                               seed});
            if (log) {
              std::lock_guard<std::mutex> lock(log_mutex);
              *log << "[analysis] variance " << ansatz_label(job.architecture)
                   << " n=" << job.n_total << ": " << format_double(rep.variance)
                   << "\n";
            }
          }
          const auto& lq = plan.analysis.landscape_qubits;
          const bool want_landscape =
              plan.analysis.landscape &&
              (lq.empty() ||
               std::find(lq.begin(), lq.end(), job.n_total) != lq.end());
          if (want_landscape) {
            const std::string id0 = run_id(job.architecture, job.n_total, 0);
            std::ifstream in(out_dir / "traces" / (id0 + ".json"));
            if (!in) {
              throw std::runtime_error("missing trace for landscape: " + id0);
            }
            nlohmann::json tdoc;
            in >> tdoc;
            const ParamVector trained =
                tdoc.at("final_params").get<ParamVector>();
            const StateVector input = random_state(
                job.n_total,
                input_state_seed(plan, job.architecture, job.n_total, 0));
            const std::uint64_t dseed = mix_seed(
                plan.base_seed, {kSaltLandscape, arch_id(job.architecture),
                                 static_cast<std::uint64_t>(job.n_total)});
            const LandscapeGrid grid = loss_landscape(
                circuit, trained, input, plan.analysis.landscape_grid,
                plan.analysis.landscape_range, dseed);
            const std::string lid =
                ansatz_label(job.architecture) + "_n" +
                (job.n_total < 10 ? "0" : "") + std::to_string(job.n_total);
            {
              std::ofstream csv(out_dir / "landscape" / (lid + ".csv"));
              write_meta_line(csv, dseed, config_hash);
              csv << "alpha";
              for (std::size_t b = 0; b < grid.beta_axis.size(); ++b) {
                csv << ",b" << b;
              }
              csv << "\n";
              for (std::size_t a = 0; a < grid.alpha_axis.size(); ++a) {
                csv << format_double(grid.alpha_axis[a]);
                for (std::size_t b = 0; b < grid.beta_axis.size(); ++b) {
                  csv << ','
                      << format_double(
                             grid.losses[a * grid.beta_axis.size() + b]);
                }
                csv << "\n";
              }
            }
            {
              nlohmann::json side;
              side["version"] = kVersion;
              side["config_hash"] = config_hash;
              side["architecture"] = ansatz_name(job.architecture);
              side["n_total"] = job.n_total;
              side["depth"] = depth;
              side["grid_points"] = plan.analysis.landscape_grid;
              side["range_limit"] = plan.analysis.landscape_range;
              side["directions_seed"] = dseed;
              side["center_loss"] = grid.center_loss;
              side["alpha_axis"] = grid.alpha_axis;
              side["beta_axis"] = grid.beta_axis;
              side["trained_from_run"] = id0;
              std::ofstream js(out_dir / "landscape" / (lid + ".json"));
              js << side.dump(2) << "\n";
            }
            if (log) {
              std::lock_guard<std::mutex> lock(log_mutex);
              *log << "[analysis] landscape " << lid
                   << ": center_loss=" << format_double(grid.center_loss)
                   << "\n";
            }
          }
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          failure = e.what();
          failed.store(true);
          break;
        }
      }
    };
    const int n_aworkers = std::max(
        1, std::min<int>(plan.workers, static_cast<int>(ajobs.size())));
    if (n_aworkers == 1) {
      aworker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < n_aworkers; ++t) pool.emplace_back(aworker);
      for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error(failure);

    std::ofstream out(out_dir / "results.csv");
    write_meta_line(out, plan.base_seed, config_hash);
    out << "architecture,n_total,depth,metric,value,n_samples,seed\n";
    for (const auto& group : rows) {
      for (const ResultRow& r : group) {
        out << ansatz_name(r.architecture) << ',' << r.n_total << ',' << r.depth
            << ',' << r.metric << ',' << format_double(r.value) << ','
            << r.n_samples << ',' << r.seed << "\n";
      }
    }
  }

  if (log) {
    const auto groups = summarize(records, plan.train.max_iterations);
    *log << "\nsummary (mean stop iteration +- std over repeats):\n";
    for (const SummaryRow& row : groups) {
      *log << "  " << ansatz_label(row.architecture) << " n=" << row.n_total
           << ": " << format_double(row.mean_stop_iteration) << " +- "
           << format_double(row.std_stop_iteration) << ", converged "
           << format_double(row.fraction_converged * 100.0) << "%, efficiency "
           << format_double(row.mean_convergence_efficiency) << "\n";
    }
  }
  return records;
}

}  // namespace qlink
