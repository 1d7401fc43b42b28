// Command-line front end: model generation, forward modeling, inversion on
// synthetic data, chunk tuning, benchmark grids and summaries. Worker counts
// come from --threads or the SEISTUNE_THREADS environment variable; 0 selects
// the hardware concurrency.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "seistune/bench.hpp"
#include "seistune/fwi.hpp"
#include "seistune/io.hpp"
#include "seistune/sched.hpp"
#include "seistune/tuner.hpp"
#include "seistune/wave.hpp"

namespace {

using namespace seistune;

constexpr const char* kThreadsEnv = "SEISTUNE_THREADS";

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

sched::SchedulerSpec parse_spec(const std::string& kind, std::int64_t chunk) {
  const std::optional<sched::Kind> k = sched::kind_from_name(kind);
  if (!k) throw CLI::ValidationError("--scheduler", "unknown kind: " + kind);
  sched::SchedulerSpec spec{*k, std::nullopt};
  if (chunk > 0) spec.chunk = chunk;
  return spec;
}

wave::VelocityModel homogeneous_like(const wave::VelocityModel& shape, double v) {
  wave::VelocityModel m = shape;
  m.v.assign(m.v.size(), v);
  return m;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduled 3D acoustic modeling, inversion and chunk autotuning"};
  app.require_subcommand(1);

  // model-gen: write a Gaussian-sphere velocity model.
  struct {
    std::string out;
    std::vector<std::int64_t> dims{64, 64, 64};
    double dx = 10.0;
    double v_background = 2500.0;
    double v_peak = 3500.0;
    std::vector<double> center{0.5, 0.5, 0.5};
    double radius_scale = 0.25;
  } gen;
  CLI::App* cmd_gen = app.add_subcommand("model-gen", "Write a Gaussian-sphere velocity model");
  cmd_gen->add_option("out", gen.out, "Output model file")->required();
  cmd_gen->add_option("--dims", gen.dims, "Grid points per axis")->expected(3);
  cmd_gen->add_option("--dx", gen.dx, "Grid spacing in meters");
  cmd_gen->add_option("--v-background", gen.v_background, "Background velocity in m/s");
  cmd_gen->add_option("--v-peak", gen.v_peak, "Sphere peak velocity in m/s");
  cmd_gen->add_option("--center", gen.center, "Sphere center as fractions of each axis")
      ->expected(3);
  cmd_gen->add_option("--radius-scale", gen.radius_scale,
                      "Gaussian sigma as a fraction of the smallest axis");
  cmd_gen->callback([&] {
    const wave::VelocityModel model = wave::make_gaussian_sphere_model(
        gen.dims[0], gen.dims[1], gen.dims[2], gen.dx, gen.v_background, gen.v_peak,
        {gen.center[0], gen.center[1], gen.center[2]}, gen.radius_scale);
    io::write_model(gen.out, model);
    std::printf("wrote %s (%lld x %lld x %lld, dx %g m)\n", gen.out.c_str(),
                static_cast<long long>(model.n1), static_cast<long long>(model.n2),
                static_cast<long long>(model.n3), model.dx);
  });

  // forward: one shot through a model, seismogram to file.
  struct {
    std::string model;
    std::string out;
    std::int64_t nt = 512;
    double dt = 1e-3;
    double f_peak = 10.0;
    std::int64_t boundary = 25;
    double damping = 0.0053;
    std::vector<std::int64_t> source;
    std::int64_t receiver_depth = 2;
    std::int64_t receiver_stride = 4;
    std::string scheduler = "dynamic";
    std::int64_t chunk = 0;
    int threads = 0;
  } fwd;
  CLI::App* cmd_fwd = app.add_subcommand("forward", "Simulate one shot and write its seismogram");
  cmd_fwd->add_option("model", fwd.model, "Velocity model file")->required();
  cmd_fwd->add_option("-o,--out", fwd.out, "Seismogram output file")->required();
  cmd_fwd->add_option("--nt", fwd.nt, "Time steps");
  cmd_fwd->add_option("--dt", fwd.dt, "Time step in seconds");
  cmd_fwd->add_option("--f-peak", fwd.f_peak, "Ricker peak frequency in Hz");
  cmd_fwd->add_option("--boundary", fwd.boundary, "Absorbing halo width in cells");
  cmd_fwd->add_option("--damping", fwd.damping, "Absorbing taper strength (0 disables)");
  cmd_fwd->add_option("--source", fwd.source, "Source cell (default: grid center)")->expected(3);
  cmd_fwd->add_option("--receiver-depth", fwd.receiver_depth, "Receiver plane x1 index");
  cmd_fwd->add_option("--receiver-stride", fwd.receiver_stride, "Receiver spacing on the plane");
  cmd_fwd->add_option("--scheduler", fwd.scheduler, "static, dynamic or guided");
  cmd_fwd->add_option("--chunk", fwd.chunk, "Chunk size (0 selects the kind's default)");
  cmd_fwd->add_option("--threads", fwd.threads, "Worker threads (0 = hardware)")
      ->envname(kThreadsEnv);
  cmd_fwd->callback([&] {
    const wave::VelocityModel model = io::read_model(fwd.model);
    wave::SimConfig cfg;
    cfg.nt = fwd.nt;
    cfg.dt = fwd.dt;
    cfg.f_peak = fwd.f_peak;
    cfg.boundary_width = fwd.boundary;
    cfg.damping = fwd.damping;

    wave::Shot shot;
    shot.source = fwd.source.size() == 3
                      ? wave::GridIndex{fwd.source[0], fwd.source[1], fwd.source[2]}
                      : wave::GridIndex{model.n1 / 2, model.n2 / 2, model.n3 / 2};
    shot.receivers = wave::plane_receivers(model.n1, model.n2, model.n3, fwd.receiver_depth,
                                           fwd.receiver_stride);
    shot.wavelet = wave::ricker(cfg.f_peak, cfg.dt, cfg.nt);

    sched::WorkerPool pool(sched::PoolConfig{resolve_threads(fwd.threads)});
    const wave::ForwardResult res =
        wave::forward_modeling(model, shot, cfg, parse_spec(fwd.scheduler, fwd.chunk), pool);
    io::write_seismogram(fwd.out, res.seismogram, cfg.dt);
    const double stencil =
        std::accumulate(res.step_seconds.begin(), res.step_seconds.end(), 0.0);
    std::printf("wrote %s (%lld steps, %lld receivers, stencil time %.3f s on %d threads)\n",
                fwd.out.c_str(), static_cast<long long>(res.seismogram.nt),
                static_cast<long long>(res.seismogram.n_receivers), stencil, pool.n_threads());
  });

  // fwi: invert synthetic observed data generated from a truth model.
  struct {
    std::string truth;
    std::string initial;
    double initial_v = 0.0;
    std::string out;
    std::string per_shot_csv;
    int shots = 1;
    int iterations = 10;
    std::int64_t nt = 64;
    double dt = 1e-3;
    double f_peak = 10.0;
    std::int64_t boundary = 12;
    double damping = 0.0053;
    double step0_fraction = 0.05;
    int max_halvings = 5;
    std::int64_t snapshots = 0;
    std::string scheduler = "dynamic";
    std::int64_t chunk = 0;
    bool no_tuning = false;
    std::int64_t min_chunk = 50;
    int threads = 0;
  } inv;
  CLI::App* cmd_inv =
      app.add_subcommand("fwi", "Invert synthetic data from a truth model by gradient descent");
  cmd_inv->add_option("truth", inv.truth, "Truth model file (generates the observed data)")
      ->required();
  CLI::Option* opt_initial =
      cmd_inv->add_option("--initial", inv.initial, "Starting model file");
  cmd_inv->add_option("--initial-v", inv.initial_v, "Homogeneous starting velocity in m/s")
      ->excludes(opt_initial);
  cmd_inv->add_option("-o,--out", inv.out, "Final model output file");
  cmd_inv->add_option("--per-shot-csv", inv.per_shot_csv,
                      "Write first-iteration per-shot timings to this CSV");
  cmd_inv->add_option("--shots", inv.shots, "Shot count");
  cmd_inv->add_option("--iterations", inv.iterations, "Descent iterations");
  cmd_inv->add_option("--nt", inv.nt, "Time steps");
  cmd_inv->add_option("--dt", inv.dt, "Time step in seconds");
  cmd_inv->add_option("--f-peak", inv.f_peak, "Ricker peak frequency in Hz");
  cmd_inv->add_option("--boundary", inv.boundary, "Absorbing halo width in cells");
  cmd_inv->add_option("--damping", inv.damping, "Absorbing taper strength (0 disables)");
  cmd_inv->add_option("--step0-fraction", inv.step0_fraction,
                      "Initial step as a fraction of the mean velocity");
  cmd_inv->add_option("--max-halvings", inv.max_halvings, "Line-search halving budget");
  cmd_inv->add_option("--snapshots", inv.snapshots, "Checkpoint slots (0 = automatic)");
  cmd_inv->add_option("--scheduler", inv.scheduler,
                      "Propagation schedule (tuning replaces it with the tuned dynamic chunk)");
  cmd_inv->add_option("--chunk", inv.chunk, "Chunk size (0 selects the kind's default)");
  cmd_inv->add_flag("--no-tuning", inv.no_tuning, "Disable the chunk autotuner");
  cmd_inv->add_option("--min-chunk", inv.min_chunk, "Lower bound of the tuner's search");
  cmd_inv->add_option("--threads", inv.threads, "Worker threads (0 = hardware)")
      ->envname(kThreadsEnv);
  cmd_inv->callback([&] {
    const wave::VelocityModel truth = io::read_model(inv.truth);
    wave::VelocityModel initial;
    if (!inv.initial.empty()) {
      initial = io::read_model(inv.initial);
    } else if (inv.initial_v > 0.0) {
      initial = homogeneous_like(truth, inv.initial_v);
    } else {
      throw CLI::ValidationError("fwi", "provide --initial or --initial-v");
    }

    fwi::FwiConfig cfg;
    cfg.n_iterations = inv.iterations;
    cfg.sim.nt = inv.nt;
    cfg.sim.dt = inv.dt;
    cfg.sim.f_peak = inv.f_peak;
    cfg.sim.boundary_width = inv.boundary;
    cfg.sim.damping = inv.damping;
    cfg.step0_fraction = inv.step0_fraction;
    cfg.max_halvings = inv.max_halvings;
    cfg.n_snapshots = inv.snapshots;
    cfg.propagation = parse_spec(inv.scheduler, inv.chunk);
    cfg.shots = bench::make_shots(truth, cfg.sim, inv.shots);

    sched::WorkerPool pool(sched::PoolConfig{resolve_threads(inv.threads)});
    std::vector<wave::Seismogram> observed;
    observed.reserve(cfg.shots.size());
    for (const wave::Shot& s : cfg.shots) {
      observed.push_back(
          wave::forward_modeling(truth, s, cfg.sim, cfg.propagation, pool).seismogram);
    }

    tuner::TuningPolicy policy;
    policy.enabled = !inv.no_tuning;
    policy.min_chunk = inv.min_chunk;
    const fwi::FwiResult res = fwi::fwi_run(initial, cfg, observed, policy, pool);

    for (const fwi::IterationStat& it : res.iterations) {
      std::printf("iteration %2d  objective %.6e  max|g| %.3e  step %.1f  %.2f s\n", it.k,
                  it.objective, it.gradient_max, it.step, it.seconds);
    }
    std::printf("stop: %s after %.2f s, objective %.6e -> %.6e\n", res.stop_reason.c_str(),
                res.total_seconds, res.objective_history.front(),
                res.objective_history.back());
    if (res.tuning) {
      const bench::TuningOverhead oh = bench::overhead_report(res);
      std::printf("tuned chunk %lld in %.3f s (%.2f%% of total, %d evaluations)\n",
                  static_cast<long long>(res.tuning->chunk), oh.tuning_seconds,
                  oh.fraction * 100.0, oh.evaluations);
    }
    if (!inv.out.empty()) {
      io::write_model(inv.out, res.model_history.back());
      std::printf("wrote %s\n", inv.out.c_str());
    }
    if (!inv.per_shot_csv.empty()) {
      const std::string label =
          policy.enabled ? "dynamic+tuned" : std::string(sched::kind_name(cfg.propagation.kind));
      write_text(inv.per_shot_csv, bench::per_shot_csv(bench::per_shot_report(res, label)));
      std::printf("wrote %s\n", inv.per_shot_csv.c_str());
    }
  });

  // tune: standalone chunk search on a model's stencil loop.
  struct {
    std::string model;
    std::string csv;
    double dt = 1e-3;
    double f_peak = 10.0;
    std::int64_t boundary = 12;
    double damping = 0.0053;
    std::int64_t min_chunk = 50;
    int discard_runs = 1;
    std::uint64_t seed = 1;
    int threads = 0;
  } tun;
  CLI::App* cmd_tun =
      app.add_subcommand("tune", "Search the dynamic chunk size for a model's stencil loop");
  cmd_tun->add_option("model", tun.model, "Velocity model file")->required();
  cmd_tun->add_option("--csv", tun.csv, "Write per-evaluation timings to this CSV");
  cmd_tun->add_option("--dt", tun.dt, "Time step in seconds");
  cmd_tun->add_option("--f-peak", tun.f_peak, "Ricker peak frequency in Hz");
  cmd_tun->add_option("--boundary", tun.boundary, "Absorbing halo width in cells");
  cmd_tun->add_option("--damping", tun.damping, "Absorbing taper strength (0 disables)");
  cmd_tun->add_option("--min-chunk", tun.min_chunk, "Lower bound of the search");
  cmd_tun->add_option("--discard-runs", tun.discard_runs,
                      "Cold-start executions dropped per evaluation");
  cmd_tun->add_option("--seed", tun.seed, "Search RNG seed");
  cmd_tun->add_option("--threads", tun.threads, "Worker threads (0 = hardware)")
      ->envname(kThreadsEnv);
  cmd_tun->callback([&] {
    const wave::VelocityModel model = io::read_model(tun.model);
    wave::SimConfig cfg;
    cfg.nt = 1;
    cfg.dt = tun.dt;
    cfg.f_peak = tun.f_peak;
    cfg.boundary_width = tun.boundary;
    cfg.damping = tun.damping;

    sched::WorkerPool pool(sched::PoolConfig{resolve_threads(tun.threads)});
    tuner::PropagationContext ctx(model, cfg, pool);
    tuner::TuningPolicy policy;
    policy.min_chunk = tun.min_chunk;
    policy.discard_runs = tun.discard_runs;
    policy.csa.rng_seed = tun.seed;
    const tuner::TuningResult res = tuner::autotune_chunk(ctx, policy);

    std::printf("loop length %lld, %d threads, bounds [%lld, %lld]%s\n",
                static_cast<long long>(ctx.n_iters()), pool.n_threads(),
                static_cast<long long>(res.bounds.lo), static_cast<long long>(res.bounds.hi),
                res.degenerate ? " (collapsed, search skipped)" : "");
    std::printf("chunk %lld, first-step time %.6f ms, %zu evaluations in %.3f s\n",
                static_cast<long long>(res.chunk), res.cost_seconds * 1e3,
                res.evaluations.size(), res.tuning_wall_seconds);
    if (!tun.csv.empty()) {
      write_text(tun.csv, tuner::evaluations_csv(res));
      std::printf("wrote %s\n", tun.csv.c_str());
    }
  });

  // bench: run the benchmark grid from a config file.
  struct {
    std::string config;
    std::string out;
    int threads = -1;
    int repetitions = 0;
  } ben;
  CLI::App* cmd_ben = app.add_subcommand("bench", "Run the benchmark grid from a config file");
  cmd_ben->add_option("config", ben.config, "Experiment config file")->required();
  cmd_ben->add_option("-o,--out", ben.out, "Override the output CSV path");
  cmd_ben->add_option("--threads", ben.threads, "Override the worker count (0 = hardware)")
      ->envname(kThreadsEnv);
  cmd_ben->add_option("--repetitions", ben.repetitions, "Override the repetition count");
  cmd_ben->callback([&] {
    bench::ExperimentConfig cfg = bench::load_config(ben.config);
    if (!ben.out.empty()) cfg.out_csv = ben.out;
    if (ben.threads >= 0) cfg.threads = ben.threads;
    if (ben.repetitions > 0) cfg.repetitions = ben.repetitions;
    const std::vector<bench::RunRecord> records = bench::run_experiment(cfg, &std::cout);
    std::printf("%zu runs executed, records in %s\n", records.size(), cfg.out_csv.c_str());
  });

  // summarize: medians and pairwise speedups from a runs CSV.
  struct {
    std::string csv;
    std::string out;
    int expected_reps = 0;
  } sum;
  CLI::App* cmd_sum =
      app.add_subcommand("summarize", "Median runtimes and speedups from a runs CSV");
  cmd_sum->add_option("csv", sum.csv, "Runs CSV written by bench")->required();
  cmd_sum->add_option("-o,--out", sum.out, "Summary CSV output file (default: stdout)");
  cmd_sum->add_option("--expected-reps", sum.expected_reps,
                      "Mark cells with fewer repetitions incomplete");
  cmd_sum->callback([&] {
    if (!std::ifstream(sum.csv)) throw std::runtime_error("cannot read " + sum.csv);
    const std::vector<bench::RunRecord> records = bench::load_records(sum.csv);
    const std::string text = bench::summary_csv(bench::summarize(records, sum.expected_reps));
    if (sum.out.empty()) {
      std::fputs(text.c_str(), stdout);
    } else {
      write_text(sum.out, text);
      std::printf("wrote %s (%zu records in)\n", sum.out.c_str(), records.size());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
