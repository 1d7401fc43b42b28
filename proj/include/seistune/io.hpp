#pragma once

// File formats for velocity models and seismograms: a small self-describing
// text header followed by a little-endian float64 payload.
//
//   seistune-grid 1
//   kind velocity            (or: seismogram)
//   n1 32 / n2 32 / n3 32 / dx 10        (velocity)
//   nt 512 / n_receivers 81 / dt 0.001   (seismogram)
//   data
//   <n doubles, little endian>
//
// Readers byte-swap on big-endian hosts, so files are portable.

#include <string>

#include "seistune/wave.hpp"

namespace seistune::io {

void write_model(const std::string& path, const wave::VelocityModel& model);
wave::VelocityModel read_model(const std::string& path);

struct SeismogramFile {
  wave::Seismogram seismogram;
  double dt = 0.0;
};

void write_seismogram(const std::string& path, const wave::Seismogram& seismogram,
                      double dt);
SeismogramFile read_seismogram(const std::string& path);

}  // namespace seistune::io
