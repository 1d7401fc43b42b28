#include "seistune/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace seistune::bench {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse integer for " + what + ": '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(trim(s), &used);
    if (used != trim(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse number for " + what + ": '" + s + "'");
  }
}

std::string sanitize_csv_field(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = '_';
  }
  return s;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

struct LabelSpec {
  sched::Kind kind = sched::Kind::kDynamic;
  bool competitor = false;
  bool tuned = false;
};

LabelSpec decode_label(const std::string& label) {
  if (label == "static") return {sched::Kind::kStatic, false, false};
  if (label == "dynamic") return {sched::Kind::kDynamic, false, false};
  if (label == "guided") return {sched::Kind::kGuided, false, false};
  if (label == "dynamic+tuned") return {sched::Kind::kDynamic, false, true};
  if (label == "static-competitor") return {sched::Kind::kStatic, true, false};
  if (label == "dynamic-competitor") return {sched::Kind::kDynamic, true, false};
  if (label == "guided-competitor") return {sched::Kind::kGuided, true, false};
  throw std::invalid_argument("unknown scheduler label: '" + label + "'");
}

}  // namespace

std::vector<std::string> known_scheduler_labels() {
  return {"static",        "dynamic",           "guided",
          "dynamic+tuned", "static-competitor", "dynamic-competitor",
          "guided-competitor"};
}

bool is_known_scheduler_label(const std::string& label) {
  const auto labels = known_scheduler_labels();
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::string to_csv_row(const RunRecord& r) {
  std::string out;
  out += sanitize_csv_field(r.scheduler);
  out += ',' + std::to_string(r.chunk);
  out += ',' + std::to_string(r.n1);
  out += ',' + std::to_string(r.n2);
  out += ',' + std::to_string(r.n3);
  out += ',' + std::to_string(r.threads);
  out += ',' + std::to_string(r.shots);
  out += ',' + std::to_string(r.rep);
  out += ',' + fmt_double(r.seconds);
  out += ',';
  if (r.tuned_chunk) out += std::to_string(*r.tuned_chunk);
  out += ',' + fmt_double(r.tuning_seconds);
  out += ',' + sanitize_csv_field(r.host);
  return out;
}

RunRecord parse_csv_row(const std::string& line) {
  std::vector<std::string> f = split(line, ',');
  if (f.size() != 12) {
    throw std::invalid_argument("run record needs 12 fields, got " +
                                std::to_string(f.size()) + ": '" + line + "'");
  }
  RunRecord r;
  r.scheduler = f[0];
  r.chunk = parse_int(f[1], "chunk");
  r.n1 = parse_int(f[2], "n1");
  r.n2 = parse_int(f[3], "n2");
  r.n3 = parse_int(f[4], "n3");
  r.threads = static_cast<int>(parse_int(f[5], "threads"));
  r.shots = static_cast<int>(parse_int(f[6], "shots"));
  r.rep = static_cast<int>(parse_int(f[7], "rep"));
  r.seconds = parse_double(f[8], "seconds");
  if (!trim(f[9]).empty()) r.tuned_chunk = parse_int(f[9], "tuned_chunk");
  r.tuning_seconds = parse_double(f[10], "tuning_seconds");
  r.host = f[11];
  return r;
}

std::vector<RunRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::vector<RunRecord> out;
  std::string line;
  bool schema_seen = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      auto pos = t.find("schema=");
      if (pos != std::string::npos) {
        std::string schema = trim(t.substr(pos + 7));
        if (schema != kCsvSchema) {
          throw std::runtime_error(path + ": unsupported schema '" + schema + "'");
        }
        schema_seen = true;
      }
      continue;
    }
    if (t == kCsvHeader) continue;
    out.push_back(parse_csv_row(t));
  }
  if (!out.empty() && !schema_seen) {
    throw std::runtime_error(path + ": missing schema tag");
  }
  return out;
}

std::string host_tag() {
  char name[256] = {0};
  if (gethostname(name, sizeof name - 1) != 0) {
    std::snprintf(name, sizeof name, "unknown");
  }
  unsigned cores = std::thread::hardware_concurrency();
  long mhz = 0;
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("cpu MHz", 0) == 0) {
      auto pos = line.find(':');
      if (pos != std::string::npos) {
        try {
          mhz = std::lround(std::stod(line.substr(pos + 1)));
        } catch (const std::exception&) {
          mhz = 0;
        }
      }
      break;
    }
  }
  std::string tag = std::string(name) + ":" + std::to_string(cores) + "c:" +
                    std::to_string(mhz) + "MHz";
  return sanitize_csv_field(tag);
}

std::string current_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string section;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("malformed section header");
      section = t.substr(1, t.size() - 2);
      if (section != "experiment" && section != "model" && section != "sim" &&
          section != "tuning" && section != "csa" && section != "fwi") {
        fail("unknown section [" + section + "]");
      }
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (section == "experiment") {
      if (key == "dims") {
        cfg.dims.clear();
        for (const std::string& part : split(value, ',')) {
          std::vector<std::string> xyz = split(trim(part), 'x');
          if (xyz.size() != 3) fail("dims entries must look like 25x100x100");
          cfg.dims.push_back({parse_int(xyz[0], "dims"), parse_int(xyz[1], "dims"),
                              parse_int(xyz[2], "dims")});
        }
      } else if (key == "schedulers") {
        cfg.schedulers.clear();
        for (const std::string& part : split(value, ',')) {
          std::string label = trim(part);
          decode_label(label);  // validates
          cfg.schedulers.push_back(label);
        }
      } else if (key == "shots") {
        cfg.shots.clear();
        for (const std::string& part : split(value, ',')) {
          cfg.shots.push_back(static_cast<int>(parse_int(part, "shots")));
        }
      } else if (key == "repetitions") {
        cfg.repetitions = static_cast<int>(parse_int(value, key));
      } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_int(value, key));
      } else if (key == "out") {
        cfg.out_csv = value;
      } else if (key == "n_fwi") {
        cfg.n_fwi = static_cast<int>(parse_int(value, key));
      } else {
        fail("unknown key '" + key + "' in [experiment]");
      }
    } else if (section == "model") {
      if (key == "dx") {
        cfg.model.dx = parse_double(value, key);
      } else if (key == "v_bg") {
        cfg.model.v_background = parse_double(value, key);
      } else if (key == "v_peak") {
        cfg.model.v_peak = parse_double(value, key);
      } else if (key == "center") {
        std::vector<std::string> c = split(value, ',');
        if (c.size() != 3) fail("center needs three values");
        for (int i = 0; i < 3; ++i) {
          cfg.model.center_frac[static_cast<std::size_t>(i)] =
              parse_double(c[static_cast<std::size_t>(i)], key);
        }
      } else if (key == "radius_scale") {
        cfg.model.radius_scale = parse_double(value, key);
      } else if (key == "base_n1") {
        cfg.model.base_n1 = parse_int(value, key);
      } else {
        fail("unknown key '" + key + "' in [model]");
      }
    } else if (section == "sim") {
      if (key == "nt") {
        cfg.sim.nt = parse_int(value, key);
      } else if (key == "dt") {
        cfg.sim.dt = parse_double(value, key);
      } else if (key == "f_peak") {
        cfg.sim.f_peak = parse_double(value, key);
      } else if (key == "boundary_width") {
        cfg.sim.boundary_width = parse_int(value, key);
      } else if (key == "damping") {
        cfg.sim.damping = parse_double(value, key);
      } else {
        fail("unknown key '" + key + "' in [sim]");
      }
    } else if (section == "tuning") {
      if (key == "min_chunk") {
        cfg.tuning.min_chunk = parse_int(value, key);
      } else if (key == "discard_runs") {
        cfg.tuning.discard_runs = static_cast<int>(parse_int(value, key));
      } else {
        fail("unknown key '" + key + "' in [tuning]");
      }
    } else if (section == "csa") {
      if (key == "optimizers") {
        cfg.tuning.csa.n_optimizers = static_cast<int>(parse_int(value, key));
      } else if (key == "iterations") {
        cfg.tuning.csa.n_iterations = static_cast<int>(parse_int(value, key));
      } else if (key == "t0_gen") {
        cfg.tuning.csa.t0_gen = parse_double(value, key);
      } else if (key == "t0_ac") {
        cfg.tuning.csa.t0_ac = parse_double(value, key);
      } else if (key == "seed") {
        cfg.tuning.csa.rng_seed = static_cast<std::uint64_t>(parse_int(value, key));
      } else {
        fail("unknown key '" + key + "' in [csa]");
      }
    } else if (section == "fwi") {
      if (key == "step0") {
        cfg.step0_fraction = parse_double(value, key);
      } else if (key == "snapshots") {
        cfg.n_snapshots = parse_int(value, key);
      } else {
        fail("unknown key '" + key + "' in [fwi]");
      }
    } else {
      fail("key outside any section");
    }
  }
  if (cfg.repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
  if (cfg.n_fwi < 1) throw std::invalid_argument("config: n_fwi must be >= 1");
  if (cfg.dims.empty()) throw std::invalid_argument("config: dims must not be empty");
  if (cfg.schedulers.empty()) throw std::invalid_argument("config: schedulers must not be empty");
  if (cfg.shots.empty()) throw std::invalid_argument("config: shots must not be empty");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  ExperimentConfig cfg = parse_config(in);
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[experiment]\ndims = ";
  for (std::size_t i = 0; i < cfg.dims.size(); ++i) {
    if (i) out << ", ";
    out << cfg.dims[i][0] << 'x' << cfg.dims[i][1] << 'x' << cfg.dims[i][2];
  }
  out << "\nschedulers = ";
  for (std::size_t i = 0; i < cfg.schedulers.size(); ++i) {
    if (i) out << ", ";
    out << cfg.schedulers[i];
  }
  out << "\nshots = ";
  for (std::size_t i = 0; i < cfg.shots.size(); ++i) {
    if (i) out << ", ";
    out << cfg.shots[i];
  }
  out << "\nrepetitions = " << cfg.repetitions;
  out << "\nthreads = " << cfg.threads;
  out << "\nout = " << cfg.out_csv;
  out << "\nn_fwi = " << cfg.n_fwi;
  out << "\n\n[model]\ndx = " << fmt_double(cfg.model.dx);
  out << "\nv_bg = " << fmt_double(cfg.model.v_background);
  out << "\nv_peak = " << fmt_double(cfg.model.v_peak);
  out << "\ncenter = " << fmt_double(cfg.model.center_frac[0]) << ", "
      << fmt_double(cfg.model.center_frac[1]) << ", "
      << fmt_double(cfg.model.center_frac[2]);
  out << "\nradius_scale = " << fmt_double(cfg.model.radius_scale);
  out << "\nbase_n1 = " << cfg.model.base_n1;
  out << "\n\n[sim]\nnt = " << cfg.sim.nt;
  out << "\ndt = " << fmt_double(cfg.sim.dt);
  out << "\nf_peak = " << fmt_double(cfg.sim.f_peak);
  out << "\nboundary_width = " << cfg.sim.boundary_width;
  out << "\ndamping = " << fmt_double(cfg.sim.damping);
  out << "\n\n[tuning]\nmin_chunk = " << cfg.tuning.min_chunk;
  out << "\ndiscard_runs = " << cfg.tuning.discard_runs;
  out << "\n\n[csa]\noptimizers = " << cfg.tuning.csa.n_optimizers;
  out << "\niterations = " << cfg.tuning.csa.n_iterations;
  out << "\nt0_gen = " << fmt_double(cfg.tuning.csa.t0_gen);
  out << "\nt0_ac = " << fmt_double(cfg.tuning.csa.t0_ac);
  out << "\nseed = " << cfg.tuning.csa.rng_seed;
  out << "\n\n[fwi]\nstep0 = " << fmt_double(cfg.step0_fraction);
  out << "\nsnapshots = " << cfg.n_snapshots;
  out << '\n';
  return out.str();
}

std::vector<PlannedRun> plan_runs(const ExperimentConfig& config) {
  std::vector<PlannedRun> out;
  for (const auto& d : config.dims) {
    for (const std::string& label : config.schedulers) {
      for (int sc : config.shots) {
        for (int rep = 0; rep < config.repetitions; ++rep) {
          out.push_back({d, label, sc, rep});
        }
      }
    }
  }
  return out;
}

std::string run_key(const RunRecord& r) {
  return r.scheduler + "|" + std::to_string(r.n1) + "x" + std::to_string(r.n2) +
         "x" + std::to_string(r.n3) + "|t" + std::to_string(r.threads) + "|s" +
         std::to_string(r.shots) + "|r" + std::to_string(r.rep);
}

std::string run_key(const PlannedRun& run, int threads) {
  return run.scheduler + "|" + std::to_string(run.dims[0]) + "x" +
         std::to_string(run.dims[1]) + "x" + std::to_string(run.dims[2]) + "|t" +
         std::to_string(threads) + "|s" + std::to_string(run.shots) + "|r" +
         std::to_string(run.rep);
}

std::vector<wave::Shot> make_shots(const wave::VelocityModel& model,
                                   const wave::SimConfig& sim, int count) {
  if (count < 1) throw std::invalid_argument("make_shots: count must be >= 1");
  std::vector<double> wavelet = wave::ricker(sim.f_peak, sim.dt, sim.nt);
  std::vector<wave::GridIndex> receivers =
      wave::plane_receivers(model.n1, model.n2, model.n3);
  std::vector<wave::Shot> shots;
  shots.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    double frac = static_cast<double>(k + 1) / static_cast<double>(count + 1);
    auto i2 = static_cast<std::int64_t>(
        std::lround(frac * static_cast<double>(model.n2 - 1)));
    shots.push_back({{model.n1 / 2, std::clamp<std::int64_t>(i2, 0, model.n2 - 1),
                      model.n3 / 2},
                     receivers,
                     wavelet});
  }
  return shots;
}

namespace {

struct CellData {
  wave::VelocityModel initial;
  std::vector<wave::Shot> shots;
  std::vector<wave::Seismogram> observed;
};

CellData make_cell_data(const ExperimentConfig& cfg, std::array<std::int64_t, 3> dims,
                        int shot_count, sched::WorkerPool& pool) {
  std::int64_t base_n1 = std::max(cfg.model.base_n1, dims[0]);
  wave::VelocityModel truth = wave::make_gaussian_sphere_model(
      base_n1, dims[1], dims[2], cfg.model.dx, cfg.model.v_background,
      cfg.model.v_peak, cfg.model.center_frac, cfg.model.radius_scale);
  if (dims[0] < base_n1) truth = wave::first_slices(truth, dims[0]);

  CellData cell;
  cell.initial = truth;
  std::fill(cell.initial.v.begin(), cell.initial.v.end(), cfg.model.v_background);
  cell.shots = make_shots(truth, cfg.sim, shot_count);
  sched::SchedulerSpec spec{sched::Kind::kDynamic, std::nullopt};
  for (const wave::Shot& shot : cell.shots) {
    cell.observed.push_back(
        wave::forward_modeling(truth, shot, cfg.sim, spec, pool).seismogram);
  }
  return cell;
}

RunRecord execute_run(const ExperimentConfig& cfg, const PlannedRun& run,
                      const CellData& cell, sched::WorkerPool& pool,
                      const std::string& host) {
  LabelSpec label = decode_label(run.scheduler);
  sched::SchedulerSpec spec{label.kind, std::nullopt};
  if (label.competitor) {
    wave::Propagator probe(cell.initial, cfg.sim);
    spec.chunk = sched::competitor_chunk(probe.scheduled_range().length(),
                                         pool.n_threads());
  }
  tuner::TuningPolicy policy = cfg.tuning;
  policy.enabled = label.tuned;

  fwi::FwiConfig fc;
  fc.n_iterations = cfg.n_fwi;
  fc.shots = cell.shots;
  fc.sim = cfg.sim;
  fc.step0_fraction = cfg.step0_fraction;
  fc.n_snapshots = cfg.n_snapshots;
  fc.propagation = spec;

  fwi::FwiResult res = fwi::fwi_run(cell.initial, fc, cell.observed, policy, pool);

  RunRecord rec;
  rec.scheduler = run.scheduler;
  if (res.propagation_spec.chunk) {
    rec.chunk = *res.propagation_spec.chunk;
  } else {
    wave::Propagator probe(cell.initial, cfg.sim);
    rec.chunk = sched::default_chunk(res.propagation_spec.kind,
                                     probe.scheduled_range(), pool.n_threads());
  }
  rec.n1 = run.dims[0];
  rec.n2 = run.dims[1];
  rec.n3 = run.dims[2];
  rec.threads = pool.n_threads();
  rec.shots = run.shots;
  rec.rep = run.rep;
  rec.seconds = res.total_seconds;
  if (res.tuning) {
    rec.tuned_chunk = res.tuning->chunk;
    rec.tuning_seconds = res.tuning->tuning_wall_seconds;
  }
  rec.host = host;
  rec.timestamp = current_timestamp();
  return rec;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config,
                                      std::ostream* log) {
  int threads = resolve_threads(config.threads);
  sched::WorkerPool pool({threads});
  std::string host = host_tag();

  std::vector<RunRecord> existing = load_records(config.out_csv);
  std::set<std::string> done;
  for (const RunRecord& r : existing) done.insert(run_key(r));

  bool fresh = !std::filesystem::exists(config.out_csv);
  std::ofstream out(config.out_csv, std::ios::app);
  if (!out) throw std::runtime_error("cannot open for append: " + config.out_csv);
  if (fresh) {
    out << "# schema=" << kCsvSchema << '\n' << kCsvHeader << '\n';
    out.flush();
  }

  {
    ExperimentConfig effective = config;
    effective.threads = threads;
    std::ofstream conf(config.out_csv + ".conf");
    if (conf) conf << serialize_config(effective);
  }

  auto say = [&](const std::string& msg) {
    if (log) *log << msg << '\n' << std::flush;
  };

  std::vector<RunRecord> executed;
  std::vector<PlannedRun> runs = plan_runs(config);

  // Group consecutive runs of one cell so data generation and the warm-up
  // happen once per cell.
  std::size_t i = 0;
  while (i < runs.size()) {
    std::size_t j = i;
    while (j < runs.size() && runs[j].dims == runs[i].dims &&
           runs[j].scheduler == runs[i].scheduler && runs[j].shots == runs[i].shots) {
      ++j;
    }
    std::vector<std::size_t> pending;
    bool any_done = false;
    for (std::size_t k = i; k < j; ++k) {
      if (done.count(run_key(runs[k], threads))) {
        any_done = true;
      } else {
        pending.push_back(k);
      }
    }
    if (pending.empty()) {
      i = j;
      continue;
    }

    const PlannedRun& head = runs[i];
    std::string cell_name = head.scheduler + " " + std::to_string(head.dims[0]) +
                            "x" + std::to_string(head.dims[1]) + "x" +
                            std::to_string(head.dims[2]) + " shots=" +
                            std::to_string(head.shots);
    CellData cell;
    try {
      cell = make_cell_data(config, head.dims, head.shots, pool);
    } catch (const std::exception& e) {
      say("cell " + cell_name + " setup failed: " + e.what());
      out << "# cell-failed " << sanitize_csv_field(cell_name) << " error="
          << sanitize_csv_field(e.what()) << '\n';
      out.flush();
      i = j;
      continue;
    }

    if (!any_done) {
      say("cell " + cell_name + ": warm-up");
      try {
        RunRecord warm = execute_run(config, head, cell, pool, host);
        out << "# warmup " << sanitize_csv_field(run_key(head, threads))
            << " seconds=" << fmt_double(warm.seconds) << '\n';
        out.flush();
      } catch (const std::exception& e) {
        say("cell " + cell_name + " warm-up failed: " + e.what());
        out << "# warmup-failed " << sanitize_csv_field(run_key(head, threads))
            << " error=" << sanitize_csv_field(e.what()) << '\n';
        out.flush();
      }
    }

    for (std::size_t k : pending) {
      const PlannedRun& run = runs[k];
      try {
        RunRecord rec = execute_run(config, run, cell, pool, host);
        out << to_csv_row(rec) << '\n';
        out.flush();
        executed.push_back(rec);
        done.insert(run_key(rec));
        say("done " + run_key(run, threads) + " seconds=" + fmt_double(rec.seconds));
      } catch (const std::exception& e) {
        say("failed " + run_key(run, threads) + ": " + e.what());
        out << "# run-failed " << sanitize_csv_field(run_key(run, threads))
            << " error=" << sanitize_csv_field(e.what()) << '\n';
        out.flush();
      }
    }
    i = j;
  }
  return executed;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: no values");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double speedup_percent(double baseline_seconds, double candidate_seconds) {
  if (!(candidate_seconds > 0.0)) {
    throw std::invalid_argument("speedup_percent: candidate time must be > 0");
  }
  return (baseline_seconds - candidate_seconds) / candidate_seconds * 100.0;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records,
                                  int expected_reps) {
  // Group by cell, then by scheduler within the cell.
  using CellId = std::tuple<std::int64_t, std::int64_t, std::int64_t, int, int>;
  std::map<CellId, std::map<std::string, std::vector<double>>> cells;
  for (const RunRecord& r : records) {
    cells[{r.n1, r.n2, r.n3, r.threads, r.shots}][r.scheduler].push_back(r.seconds);
  }

  auto label_rank = [](const std::string& label) {
    const auto known = known_scheduler_labels();
    auto it = std::find(known.begin(), known.end(), label);
    return it == known.end() ? known.size() : static_cast<std::size_t>(it - known.begin());
  };

  std::vector<SummaryRow> rows;
  for (const auto& [cell, by_label] : cells) {
    std::vector<std::string> labels;
    for (const auto& [label, _] : by_label) labels.push_back(label);
    std::sort(labels.begin(), labels.end(), [&](const auto& a, const auto& b) {
      auto ra = label_rank(a), rb = label_rank(b);
      return ra != rb ? ra < rb : a < b;
    });

    std::map<std::string, double> medians;
    for (const std::string& label : labels) medians[label] = median(by_label.at(label));

    for (const std::string& label : labels) {
      SummaryRow row;
      std::tie(row.n1, row.n2, row.n3, row.threads, row.shots) = cell;
      row.scheduler = label;
      row.reps = static_cast<int>(by_label.at(label).size());
      row.median_seconds = medians.at(label);
      row.complete = expected_reps <= 0 || row.reps >= expected_reps;
      for (const std::string& other : labels) {
        if (other == label) continue;
        row.speedup_vs[other] = speedup_percent(medians.at(other), medians.at(label));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  // Speedup columns for every label that appears, in canonical order.
  std::vector<std::string> labels;
  {
    std::set<std::string> seen;
    for (const SummaryRow& r : rows) {
      seen.insert(r.scheduler);
      for (const auto& [label, _] : r.speedup_vs) seen.insert(label);
    }
    for (const std::string& label : known_scheduler_labels()) {
      if (seen.count(label)) labels.push_back(label);
    }
    for (const std::string& label : seen) {
      if (!is_known_scheduler_label(label)) labels.push_back(label);
    }
  }

  auto column_name = [](std::string label) {
    for (char& c : label) {
      if (c == '+' || c == '-') c = '_';
    }
    return "speedup_vs_" + label;
  };

  std::string out = "n1,n2,n3,threads,shots,scheduler,reps,median_seconds,status";
  for (const std::string& label : labels) out += ',' + column_name(label);
  out += '\n';
  for (const SummaryRow& r : rows) {
    out += std::to_string(r.n1) + ',' + std::to_string(r.n2) + ',' +
           std::to_string(r.n3) + ',' + std::to_string(r.threads) + ',' +
           std::to_string(r.shots) + ',' + sanitize_csv_field(r.scheduler) + ',' +
           std::to_string(r.reps) + ',' + fmt_double(r.median_seconds) + ',' +
           (r.complete ? "ok" : "incomplete");
    for (const std::string& label : labels) {
      out += ',';
      auto it = r.speedup_vs.find(label);
      if (it != r.speedup_vs.end()) out += fmt_double(it->second);
    }
    out += '\n';
  }
  return out;
}

std::vector<PerShotRow> per_shot_report(const fwi::FwiResult& result,
                                        const std::string& scheduler) {
  std::vector<PerShotRow> rows;
  for (const fwi::ShotStat& s : result.shot_stats) {
    if (s.k != 0) continue;
    rows.push_back({s.shot, scheduler, s.seconds, s.tuning_seconds});
  }
  return rows;
}

std::string per_shot_csv(const std::vector<PerShotRow>& rows) {
  std::string out = "shot,scheduler,seconds,tuning_seconds\n";
  for (const PerShotRow& r : rows) {
    out += std::to_string(r.shot) + ',' + sanitize_csv_field(r.scheduler) + ',' +
           fmt_double(r.seconds) + ',' + fmt_double(r.tuning_seconds) + '\n';
  }
  return out;
}

TuningOverhead overhead_report(const fwi::FwiResult& result) {
  TuningOverhead o;
  o.total_seconds = result.total_seconds;
  if (result.tuning) {
    o.tuning_seconds = result.tuning->tuning_wall_seconds;
    o.evaluations = static_cast<int>(result.tuning->evaluations.size());
    for (const tuner::TunerEvaluation& e : result.tuning->evaluations) {
      o.sum_evaluation_walls += e.wall_seconds;
    }
  }
  if (o.total_seconds > 0.0) o.fraction = o.tuning_seconds / o.total_seconds;
  return o;
}

}  // namespace seistune::bench
