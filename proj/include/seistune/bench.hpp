#pragma once

// Benchmark harness: a grid of timed inversion runs over models, schedulers
// and shot counts, with crash-safe CSV persistence, resumption, medians and
// pairwise speedups.
//
// One run is one fwi_run (config-controlled iteration count). Records append
// to the CSV as soon as each run finishes; re-running the same config skips
// (scheduler, model, threads, shots, rep) keys that already have a record, so
// an interrupted experiment continues where it stopped. Comment lines (#)
// carry the schema tag, warm-up notes and failure notes; parsers skip them.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seistune/fwi.hpp"
#include "seistune/sched.hpp"
#include "seistune/tuner.hpp"
#include "seistune/wave.hpp"

namespace seistune::bench {

inline constexpr char kCsvSchema[] = "runrecord-v1";
inline constexpr char kCsvHeader[] =
    "scheduler,chunk,n1,n2,n3,threads,shots,rep,seconds,tuned_chunk,"
    "tuning_seconds,host";

// Scheduler labels the harness understands.
std::vector<std::string> known_scheduler_labels();
bool is_known_scheduler_label(const std::string& label);

struct RunRecord {
  std::string scheduler;
  std::int64_t chunk = 0;  // chunk the propagation loops actually used
  std::int64_t n1 = 0, n2 = 0, n3 = 0;
  int threads = 0;
  int shots = 0;
  int rep = 0;
  double seconds = 0.0;
  std::optional<std::int64_t> tuned_chunk;  // engaged tuner only
  double tuning_seconds = 0.0;
  std::string host;
  std::string timestamp;  // in-memory only, not part of the CSV schema
};

std::string to_csv_row(const RunRecord& record);
RunRecord parse_csv_row(const std::string& line);
// Reads every record in the file; throws on a schema-tag mismatch.
std::vector<RunRecord> load_records(const std::string& path);

std::string host_tag();
std::string current_timestamp();

struct ModelParams {
  double dx = 10.0;
  double v_background = 2500.0;
  double v_peak = 3500.0;
  std::array<double, 3> center_frac = {0.5, 0.5, 0.5};
  double radius_scale = 0.25;
  // When > 0, models are first_slices of a (base_n1, n2, n3) master volume so
  // every grid size shares the same geology prefix.
  std::int64_t base_n1 = 100;
};

struct ExperimentConfig {
  std::vector<std::array<std::int64_t, 3>> dims = {
      {25, 100, 100}, {50, 100, 100}, {100, 100, 100}};
  std::vector<std::string> schedulers = {"static", "dynamic", "guided",
                                         "dynamic+tuned"};
  std::vector<int> shots = {1};
  int repetitions = 5;
  int threads = 0;  // 0 selects hardware concurrency
  std::string out_csv = "runs.csv";
  int n_fwi = 1;
  ModelParams model{};
  wave::SimConfig sim{.nt = 64, .dt = 1e-3, .f_peak = 10.0,
                      .boundary_width = 12, .damping = 0.0053};
  tuner::TuningPolicy tuning{};
  double step0_fraction = 0.05;
  std::int64_t n_snapshots = 0;
};

// INI-style config: [section] headers, key = value lines, # or ; comments.
// Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

struct PlannedRun {
  std::array<std::int64_t, 3> dims;
  std::string scheduler;
  int shots = 0;
  int rep = 0;
};

// Full grid in execution order: dims x schedulers x shots x repetitions.
std::vector<PlannedRun> plan_runs(const ExperimentConfig& config);

// Key identifying a record for resumption.
std::string run_key(const RunRecord& record);
std::string run_key(const PlannedRun& run, int threads);

// Deterministic acquisition for a model: sources spread along x2 at mid x1/x3,
// receivers on a shallow plane, Ricker wavelet.
std::vector<wave::Shot> make_shots(const wave::VelocityModel& model,
                                   const wave::SimConfig& sim, int count);

// Executes the grid, appending to config.out_csv and writing the effective
// config next to it (<out_csv>.conf). Returns the records executed by this
// call (skipped ones excluded). Progress and failures go to log when given.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      std::ostream* log = nullptr);

struct SummaryRow {
  std::int64_t n1 = 0, n2 = 0, n3 = 0;
  int threads = 0;
  int shots = 0;
  std::string scheduler;
  int reps = 0;
  double median_seconds = 0.0;
  bool complete = true;
  // label -> speedup of this row vs that scheduler's median, in percent:
  // (t_other - t_this) / t_this * 100.
  std::map<std::string, double> speedup_vs;
};

double median(std::vector<double> values);
double speedup_percent(double baseline_seconds, double candidate_seconds);

// expected_reps > 0 marks rows with fewer repetitions incomplete.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records,
                                  int expected_reps = 0);
std::string summary_csv(const std::vector<SummaryRow>& rows);

struct PerShotRow {
  int shot = 0;
  std::string scheduler;
  double seconds = 0.0;
  double tuning_seconds = 0.0;
};

// First-iteration per-shot timings of one run under its scheduler label.
std::vector<PerShotRow> per_shot_report(const fwi::FwiResult& result,
                                        const std::string& scheduler);
std::string per_shot_csv(const std::vector<PerShotRow>& rows);

struct TuningOverhead {
  double tuning_seconds = 0.0;
  double total_seconds = 0.0;
  double fraction = 0.0;          // tuning_seconds / total_seconds
  int evaluations = 0;
  double sum_evaluation_walls = 0.0;  // predictor for tuning_seconds
};

TuningOverhead overhead_report(const fwi::FwiResult& result);

}  // namespace seistune::bench
