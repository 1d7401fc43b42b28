#pragma once

// 3D acoustic finite-difference propagation: second order in time, eighth order
// in space (25-point Laplacian), with an exponential-taper absorbing boundary.
//
// The physical grid (n1, n2, n3) is embedded in a padded grid with a halo of
// boundary_width cells on every face; halo velocities replicate the nearest
// physical cell. The stencil updates the padded grid minus a 4-cell rim. The
// update loop is flattened over (x1, x2) plane pairs, each iteration computing
// one full x3 line, and runs under a caller-chosen SchedulerSpec on a
// WorkerPool. The per-point arithmetic has a fixed evaluation order, so results
// are bit-identical for any scheduler, chunk size and thread count.
//
// Time stepping uses two buffers: next(x) = 2 curr(x) - prev(x) + k(x) lap(curr)(x)
// written over prev, then the buffers swap. Each time step is: stencil update,
// source injection, boundary taper of both buffers, receiver recording.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "seistune/sched.hpp"

namespace seistune::wave {

inline constexpr std::int64_t kStencilHalfWidth = 4;

// Eighth-order central second-derivative weights, center then offsets 1..4.
// The true second derivative is (sum of taps) / dx^2; kernels fold the 1/dx^2
// into their scale factors instead of into these weights.
inline constexpr std::array<double, 5> kLaplacianWeights = {
    -205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};

struct VelocityModel {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t n3 = 0;
  double dx = 10.0;  // grid spacing in meters, equal along all axes
  std::vector<double> v;  // row-major: index (i1 * n2 + i2) * n3 + i3, in m/s

  std::int64_t cell_count() const { return n1 * n2 * n3; }
  double& at(std::int64_t i1, std::int64_t i2, std::int64_t i3) {
    return v[static_cast<std::size_t>((i1 * n2 + i2) * n3 + i3)];
  }
  double at(std::int64_t i1, std::int64_t i2, std::int64_t i3) const {
    return v[static_cast<std::size_t>((i1 * n2 + i2) * n3 + i3)];
  }
};

// Background velocity plus a Gaussian high-velocity sphere. center is given in
// fractions of each axis length; the Gaussian sigma is radius_scale times the
// smallest axis extent.
VelocityModel make_gaussian_sphere_model(std::int64_t n1, std::int64_t n2,
                                         std::int64_t n3, double dx, double v_bg,
                                         double v_peak,
                                         std::array<double, 3> center_frac,
                                         double radius_scale);

// The first n1 slices of a model, so smaller volumes are prefixes of the
// largest one along x1.
VelocityModel first_slices(const VelocityModel& model, std::int64_t n1);

// Ricker wavelet sampled at t = k dt - t0 with t0 = 1 / f_peak:
// w(t) = (1 - 2 (pi f t)^2) exp(-(pi f t)^2).
std::vector<double> ricker(double f_peak, double dt, std::int64_t nt);

struct GridIndex {
  std::int64_t i1 = 0;
  std::int64_t i2 = 0;
  std::int64_t i3 = 0;

  friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

struct Shot {
  GridIndex source;                  // physical-grid coordinates
  std::vector<GridIndex> receivers;  // physical-grid coordinates
  std::vector<double> wavelet;       // at least nt samples
};

// Receiver plane at fixed shallow x1, strided over x2 and x3.
std::vector<GridIndex> plane_receivers(std::int64_t n1, std::int64_t n2,
                                       std::int64_t n3, std::int64_t depth = 2,
                                       std::int64_t stride = 4);

struct SimConfig {
  std::int64_t nt = 0;       // number of time steps
  double dt = 1e-3;          // seconds
  double f_peak = 10.0;      // Ricker peak frequency, Hz
  std::int64_t boundary_width = 25;  // halo cells per face, >= kStencilHalfWidth
  double damping = 0.0053;   // taper strength; 0 disables absorption
};

struct Dims {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  std::int64_t n3 = 0;

  std::int64_t count() const { return n1 * n2 * n3; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

// Two-buffer state on the padded grid. prev/curr hold u^{t-1}/u^t.
struct Wavefield {
  Dims dims{};
  std::vector<double> prev;
  std::vector<double> curr;

  Wavefield() = default;
  explicit Wavefield(Dims d)
      : dims(d),
        prev(static_cast<std::size_t>(d.count()), 0.0),
        curr(static_cast<std::size_t>(d.count()), 0.0) {}
};

struct Seismogram {
  std::int64_t nt = 0;
  std::int64_t n_receivers = 0;
  std::vector<double> a;  // row-major (t, receiver)

  Seismogram() = default;
  Seismogram(std::int64_t nt_, std::int64_t nr)
      : nt(nt_), n_receivers(nr), a(static_cast<std::size_t>(nt_ * nr), 0.0) {}
  double& at(std::int64_t t, std::int64_t r) {
    return a[static_cast<std::size_t>(t * n_receivers + r)];
  }
  double at(std::int64_t t, std::int64_t r) const {
    return a[static_cast<std::size_t>(t * n_receivers + r)];
  }
};

class Propagator {
 public:
  // Validates the model (positive velocities, positive dims), the config
  // (boundary_width >= stencil half-width, dt > 0, nt >= 0, damping >= 0) and
  // the stability bound max(v) dt / dx <= 0.5 (std::domain_error beyond it).
  Propagator(const VelocityModel& model, const SimConfig& config);

  Dims padded_dims() const { return pd_; }
  std::int64_t boundary_width() const { return b_; }
  const SimConfig& config() const { return cfg_; }
  double dx() const { return dx_; }
  Dims interior_dims() const { return interior_; }

  // Flattened (x1, x2) plane-pair range the stencil loop iterates over. Its
  // length is the scheduled iteration count N_i.
  sched::IterRange scheduled_range() const;

  Wavefield make_field() const { return Wavefield(pd_); }

  // One stencil update (the scheduled loop) followed by a buffer swap. Returns
  // the loop wall time in seconds as measured by the pool.
  double step(Wavefield& field, const sched::SchedulerSpec& spec,
              sched::WorkerPool& pool) const;

  // Transposed-kernel update used by adjoint sweeps: the velocity factor is
  // applied before the Laplacian instead of after,
  //   next = 2 curr - prev + lap(k curr),
  // with scratch one padded-grid array reused across calls (zeroed rim
  // preserved). Returns combined wall seconds of its two scheduled loops.
  double step_scaled_laplacian(Wavefield& field, const sched::SchedulerSpec& spec,
                               sched::WorkerPool& pool,
                               std::vector<double>& scratch) const;

  // Adds w[t] dt^2 v(src)^2 / dx^2 at the source cell of curr.
  void inject(Wavefield& field, const Shot& shot, std::int64_t t) const;

  // Adds value at a physical-grid cell of curr (receiver-side injection).
  void add_at(Wavefield& field, GridIndex at, double value) const;

  // Multiplies both buffers by the separable boundary taper. Single threaded.
  void apply_absorbing(Wavefield& field) const;

  double sample(const Wavefield& field, GridIndex at) const;

  // Padded flat index of a physical-grid cell.
  std::int64_t padded_index(GridIndex at) const;
  // Inverse of the halo embedding: padded cell -> clamped physical cell.
  GridIndex interior_of(std::int64_t i1p, std::int64_t i2p, std::int64_t i3p) const;

  // (v dt / dx)^2 on the padded grid (the stencil scale factor).
  const std::vector<double>& kappa() const { return k2_; }
  // Velocity on the padded grid (halo cells replicate the nearest physical cell).
  const std::vector<double>& padded_velocity() const { return vp_; }

 private:
  void check_inside(GridIndex at) const;

  Dims pd_{};
  Dims interior_{};
  std::int64_t b_ = 0;
  SimConfig cfg_{};
  double dx_ = 0.0;
  std::vector<double> k2_;
  std::vector<double> vp_;
  std::vector<double> taper1_, taper2_, taper3_;
};

// Called with (t, state S_t) for every t in [0, nt]: once with the initial
// state, then after each completed time step. Callers that only need selected
// states filter on t.
using StepSink = std::function<void(std::int64_t t, const Wavefield& state)>;

struct ForwardResult {
  Seismogram seismogram;
  std::vector<double> step_seconds;  // scheduled-loop wall time per time step
};

// Full forward simulation of one shot. The sink, when given, observes every
// state and has no effect on the result.
ForwardResult forward_modeling(const VelocityModel& model, const Shot& shot,
                               const SimConfig& config,
                               const sched::SchedulerSpec& spec,
                               sched::WorkerPool& pool, const StepSink& sink = {});

}  // namespace seistune::wave
