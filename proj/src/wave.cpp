#include "seistune/wave.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace seistune::wave {

namespace {

constexpr std::int64_t kHW = kStencilHalfWidth;
constexpr double kW0 = kLaplacianWeights[0];
constexpr double kW1 = kLaplacianWeights[1];
constexpr double kW2 = kLaplacianWeights[2];
constexpr double kW3 = kLaplacianWeights[3];
constexpr double kW4 = kLaplacianWeights[4];

std::int64_t clamp_index(std::int64_t i, std::int64_t n) {
  return std::clamp<std::int64_t>(i, 0, n - 1);
}

}  // namespace

VelocityModel make_gaussian_sphere_model(std::int64_t n1, std::int64_t n2,
                                         std::int64_t n3, double dx, double v_bg,
                                         double v_peak,
                                         std::array<double, 3> center_frac,
                                         double radius_scale) {
  if (n1 < 1 || n2 < 1 || n3 < 1) {
    throw std::invalid_argument("make_gaussian_sphere_model: dims must be >= 1");
  }
  if (!(v_bg > 0.0)) throw std::invalid_argument("make_gaussian_sphere_model: v_bg must be > 0");
  VelocityModel m;
  m.n1 = n1;
  m.n2 = n2;
  m.n3 = n3;
  m.dx = dx;
  m.v.resize(static_cast<std::size_t>(m.cell_count()));
  double c1 = center_frac[0] * static_cast<double>(n1 - 1);
  double c2 = center_frac[1] * static_cast<double>(n2 - 1);
  double c3 = center_frac[2] * static_cast<double>(n3 - 1);
  double sigma = radius_scale * static_cast<double>(std::min({n1, n2, n3}));
  double inv_two_sigma2 = sigma > 0.0 ? 1.0 / (2.0 * sigma * sigma) : 0.0;
  std::size_t idx = 0;
  for (std::int64_t i1 = 0; i1 < n1; ++i1) {
    for (std::int64_t i2 = 0; i2 < n2; ++i2) {
      for (std::int64_t i3 = 0; i3 < n3; ++i3, ++idx) {
        double d1 = static_cast<double>(i1) - c1;
        double d2 = static_cast<double>(i2) - c2;
        double d3 = static_cast<double>(i3) - c3;
        double r2 = d1 * d1 + d2 * d2 + d3 * d3;
        m.v[idx] = v_bg + (v_peak - v_bg) * std::exp(-r2 * inv_two_sigma2);
      }
    }
  }
  return m;
}

VelocityModel first_slices(const VelocityModel& model, std::int64_t n1) {
  if (n1 < 1 || n1 > model.n1) {
    throw std::invalid_argument("first_slices: n1 out of range");
  }
  VelocityModel out;
  out.n1 = n1;
  out.n2 = model.n2;
  out.n3 = model.n3;
  out.dx = model.dx;
  out.v.assign(model.v.begin(),
               model.v.begin() + static_cast<std::ptrdiff_t>(out.cell_count()));
  return out;
}

std::vector<double> ricker(double f_peak, double dt, std::int64_t nt) {
  if (!(f_peak > 0.0)) throw std::invalid_argument("ricker: f_peak must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("ricker: dt must be > 0");
  if (nt < 0) throw std::invalid_argument("ricker: nt must be >= 0");
  std::vector<double> w(static_cast<std::size_t>(nt));
  double t0 = 1.0 / f_peak;
  for (std::int64_t k = 0; k < nt; ++k) {
    double t = static_cast<double>(k) * dt - t0;
    double a = std::numbers::pi * f_peak * t;
    a *= a;
    w[static_cast<std::size_t>(k)] = (1.0 - 2.0 * a) * std::exp(-a);
  }
  return w;
}

std::vector<GridIndex> plane_receivers(std::int64_t n1, std::int64_t n2,
                                       std::int64_t n3, std::int64_t depth,
                                       std::int64_t stride) {
  if (n1 < 1 || n2 < 1 || n3 < 1) throw std::invalid_argument("plane_receivers: dims must be >= 1");
  if (stride < 1) throw std::invalid_argument("plane_receivers: stride must be >= 1");
  std::int64_t i1 = clamp_index(depth, n1);
  std::vector<GridIndex> out;
  for (std::int64_t i2 = 0; i2 < n2; i2 += stride) {
    for (std::int64_t i3 = 0; i3 < n3; i3 += stride) {
      out.push_back({i1, i2, i3});
    }
  }
  return out;
}

Propagator::Propagator(const VelocityModel& model, const SimConfig& config)
    : cfg_(config), dx_(model.dx) {
  if (model.n1 < 1 || model.n2 < 1 || model.n3 < 1) {
    throw std::invalid_argument("Propagator: model dims must be >= 1");
  }
  if (static_cast<std::int64_t>(model.v.size()) != model.cell_count()) {
    throw std::invalid_argument("Propagator: model buffer size does not match dims");
  }
  if (!(model.dx > 0.0)) throw std::invalid_argument("Propagator: dx must be > 0");
  if (!(config.dt > 0.0)) throw std::invalid_argument("Propagator: dt must be > 0");
  if (config.nt < 0) throw std::invalid_argument("Propagator: nt must be >= 0");
  if (config.boundary_width < kHW) {
    throw std::invalid_argument("Propagator: boundary_width must be >= " +
                                std::to_string(kHW));
  }
  if (config.damping < 0.0) throw std::invalid_argument("Propagator: damping must be >= 0");

  double v_max = 0.0;
  for (double v : model.v) {
    if (!(v > 0.0)) throw std::invalid_argument("Propagator: velocities must be > 0");
    v_max = std::max(v_max, v);
  }
  double courant = v_max * config.dt / model.dx;
  if (courant > 0.5) {
    throw std::domain_error("Propagator: stability bound violated: max(v) dt / dx = " +
                            std::to_string(courant) + " > 0.5");
  }

  interior_ = {model.n1, model.n2, model.n3};
  b_ = config.boundary_width;
  pd_ = {model.n1 + 2 * b_, model.n2 + 2 * b_, model.n3 + 2 * b_};

  vp_.resize(static_cast<std::size_t>(pd_.count()));
  k2_.resize(vp_.size());
  double scale = config.dt / model.dx;
  std::size_t idx = 0;
  for (std::int64_t i1 = 0; i1 < pd_.n1; ++i1) {
    std::int64_t m1 = clamp_index(i1 - b_, interior_.n1);
    for (std::int64_t i2 = 0; i2 < pd_.n2; ++i2) {
      std::int64_t m2 = clamp_index(i2 - b_, interior_.n2);
      for (std::int64_t i3 = 0; i3 < pd_.n3; ++i3, ++idx) {
        std::int64_t m3 = clamp_index(i3 - b_, interior_.n3);
        double v = model.at(m1, m2, m3);
        vp_[idx] = v;
        double c = v * scale;
        k2_[idx] = c * c;
      }
    }
  }

  auto make_taper = [&](std::int64_t n) {
    std::vector<double> t(static_cast<std::size_t>(n), 1.0);
    for (std::int64_t i = 0; i < n; ++i) {
      std::int64_t d = std::min(i, n - 1 - i);
      if (d < b_) {
        double a = cfg_.damping * static_cast<double>(b_ - d);
        t[static_cast<std::size_t>(i)] = std::exp(-(a * a));
      }
    }
    return t;
  };
  taper1_ = make_taper(pd_.n1);
  taper2_ = make_taper(pd_.n2);
  taper3_ = make_taper(pd_.n3);
}

sched::IterRange Propagator::scheduled_range() const {
  return {0, (pd_.n1 - 2 * kHW) * (pd_.n2 - 2 * kHW)};
}

double Propagator::step(Wavefield& field, const sched::SchedulerSpec& spec,
                        sched::WorkerPool& pool) const {
  if (field.dims != pd_) throw std::invalid_argument("step: field dims mismatch");
  const std::int64_t p2 = pd_.n2;
  const std::int64_t p3 = pd_.n3;
  const std::int64_t u2 = p2 - 2 * kHW;
  const std::int64_t s1 = p2 * p3;
  const std::int64_t s2 = p3;
  const double* __restrict c = field.curr.data();
  double* __restrict out = field.prev.data();
  const double* __restrict k = k2_.data();

  double seconds = pool.run(scheduled_range(), spec, [&](std::int64_t plane) {
    std::int64_t i1 = kHW + plane / u2;
    std::int64_t i2 = kHW + plane % u2;
    std::int64_t row = (i1 * p2 + i2) * p3;
    for (std::int64_t i3 = kHW; i3 < p3 - kHW; ++i3) {
      std::int64_t x = row + i3;
      double s = 3.0 * kW0 * c[x];
      s += kW1 * (c[x - 1] + c[x + 1]);
      s += kW2 * (c[x - 2] + c[x + 2]);
      s += kW3 * (c[x - 3] + c[x + 3]);
      s += kW4 * (c[x - 4] + c[x + 4]);
      s += kW1 * (c[x - s2] + c[x + s2]);
      s += kW2 * (c[x - 2 * s2] + c[x + 2 * s2]);
      s += kW3 * (c[x - 3 * s2] + c[x + 3 * s2]);
      s += kW4 * (c[x - 4 * s2] + c[x + 4 * s2]);
      s += kW1 * (c[x - s1] + c[x + s1]);
      s += kW2 * (c[x - 2 * s1] + c[x + 2 * s1]);
      s += kW3 * (c[x - 3 * s1] + c[x + 3 * s1]);
      s += kW4 * (c[x - 4 * s1] + c[x + 4 * s1]);
      out[x] = 2.0 * c[x] - out[x] + k[x] * s;
    }
  });
  std::swap(field.prev, field.curr);
  return seconds;
}

double Propagator::step_scaled_laplacian(Wavefield& field,
                                         const sched::SchedulerSpec& spec,
                                         sched::WorkerPool& pool,
                                         std::vector<double>& scratch) const {
  if (field.dims != pd_) throw std::invalid_argument("step_scaled_laplacian: field dims mismatch");
  scratch.resize(static_cast<std::size_t>(pd_.count()), 0.0);
  const std::int64_t p2 = pd_.n2;
  const std::int64_t p3 = pd_.n3;
  const std::int64_t u2 = p2 - 2 * kHW;
  const std::int64_t s1 = p2 * p3;
  const std::int64_t s2 = p3;
  const double* __restrict c = field.curr.data();
  double* __restrict out = field.prev.data();
  const double* __restrict k = k2_.data();
  double* __restrict tmp = scratch.data();

  // Rim entries of scratch start at zero and are never written, which encodes
  // the restriction of the operator to the update domain.
  double seconds = pool.run(scheduled_range(), spec, [&](std::int64_t plane) {
    std::int64_t i1 = kHW + plane / u2;
    std::int64_t i2 = kHW + plane % u2;
    std::int64_t row = (i1 * p2 + i2) * p3;
    for (std::int64_t i3 = kHW; i3 < p3 - kHW; ++i3) {
      std::int64_t x = row + i3;
      tmp[x] = k[x] * c[x];
    }
  });
  seconds += pool.run(scheduled_range(), spec, [&](std::int64_t plane) {
    std::int64_t i1 = kHW + plane / u2;
    std::int64_t i2 = kHW + plane % u2;
    std::int64_t row = (i1 * p2 + i2) * p3;
    for (std::int64_t i3 = kHW; i3 < p3 - kHW; ++i3) {
      std::int64_t x = row + i3;
      double s = 3.0 * kW0 * tmp[x];
      s += kW1 * (tmp[x - 1] + tmp[x + 1]);
      s += kW2 * (tmp[x - 2] + tmp[x + 2]);
      s += kW3 * (tmp[x - 3] + tmp[x + 3]);
      s += kW4 * (tmp[x - 4] + tmp[x + 4]);
      s += kW1 * (tmp[x - s2] + tmp[x + s2]);
      s += kW2 * (tmp[x - 2 * s2] + tmp[x + 2 * s2]);
      s += kW3 * (tmp[x - 3 * s2] + tmp[x + 3 * s2]);
      s += kW4 * (tmp[x - 4 * s2] + tmp[x + 4 * s2]);
      s += kW1 * (tmp[x - s1] + tmp[x + s1]);
      s += kW2 * (tmp[x - 2 * s1] + tmp[x + 2 * s1]);
      s += kW3 * (tmp[x - 3 * s1] + tmp[x + 3 * s1]);
      s += kW4 * (tmp[x - 4 * s1] + tmp[x + 4 * s1]);
      out[x] = 2.0 * c[x] - out[x] + s;
    }
  });
  std::swap(field.prev, field.curr);
  return seconds;
}

void Propagator::inject(Wavefield& field, const Shot& shot, std::int64_t t) const {
  if (t < 0 || t >= static_cast<std::int64_t>(shot.wavelet.size())) {
    throw std::out_of_range("inject: time index outside the wavelet");
  }
  std::int64_t x = padded_index(shot.source);
  field.curr[static_cast<std::size_t>(x)] +=
      shot.wavelet[static_cast<std::size_t>(t)] * k2_[static_cast<std::size_t>(x)];
}

void Propagator::add_at(Wavefield& field, GridIndex at, double value) const {
  field.curr[static_cast<std::size_t>(padded_index(at))] += value;
}

void Propagator::apply_absorbing(Wavefield& field) const {
  if (field.dims != pd_) throw std::invalid_argument("apply_absorbing: field dims mismatch");
  double* __restrict prev = field.prev.data();
  double* __restrict curr = field.curr.data();
  std::size_t idx = 0;
  for (std::int64_t i1 = 0; i1 < pd_.n1; ++i1) {
    double w1 = taper1_[static_cast<std::size_t>(i1)];
    for (std::int64_t i2 = 0; i2 < pd_.n2; ++i2) {
      double w12 = w1 * taper2_[static_cast<std::size_t>(i2)];
      for (std::int64_t i3 = 0; i3 < pd_.n3; ++i3, ++idx) {
        double w = w12 * taper3_[static_cast<std::size_t>(i3)];
        prev[idx] *= w;
        curr[idx] *= w;
      }
    }
  }
}

double Propagator::sample(const Wavefield& field, GridIndex at) const {
  return field.curr[static_cast<std::size_t>(padded_index(at))];
}

std::int64_t Propagator::padded_index(GridIndex at) const {
  check_inside(at);
  return ((at.i1 + b_) * pd_.n2 + (at.i2 + b_)) * pd_.n3 + (at.i3 + b_);
}

GridIndex Propagator::interior_of(std::int64_t i1p, std::int64_t i2p,
                                  std::int64_t i3p) const {
  return {clamp_index(i1p - b_, interior_.n1), clamp_index(i2p - b_, interior_.n2),
          clamp_index(i3p - b_, interior_.n3)};
}

void Propagator::check_inside(GridIndex at) const {
  if (at.i1 < 0 || at.i1 >= interior_.n1 || at.i2 < 0 || at.i2 >= interior_.n2 ||
      at.i3 < 0 || at.i3 >= interior_.n3) {
    throw std::invalid_argument("grid position outside the physical volume");
  }
}

ForwardResult forward_modeling(const VelocityModel& model, const Shot& shot,
                               const SimConfig& config,
                               const sched::SchedulerSpec& spec,
                               sched::WorkerPool& pool, const StepSink& sink) {
  Propagator prop(model, config);
  if (static_cast<std::int64_t>(shot.wavelet.size()) < config.nt) {
    throw std::invalid_argument("forward_modeling: wavelet shorter than nt");
  }
  for (const GridIndex& r : shot.receivers) prop.padded_index(r);  // validates

  ForwardResult result;
  result.seismogram = Seismogram(config.nt,
                                 static_cast<std::int64_t>(shot.receivers.size()));
  result.step_seconds.reserve(static_cast<std::size_t>(config.nt));

  Wavefield field = prop.make_field();
  if (sink) sink(0, field);
  for (std::int64_t t = 0; t < config.nt; ++t) {
    double secs = prop.step(field, spec, pool);
    prop.inject(field, shot, t);
    prop.apply_absorbing(field);
    for (std::size_t r = 0; r < shot.receivers.size(); ++r) {
      result.seismogram.at(t, static_cast<std::int64_t>(r)) =
          prop.sample(field, shot.receivers[r]);
    }
    result.step_seconds.push_back(secs);
    if (sink) sink(t + 1, field);
  }
  return result;
}

}  // namespace seistune::wave
