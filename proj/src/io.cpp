#include "seistune/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace seistune::io {

namespace {

constexpr char kMagic[] = "seistune-grid 1";

void swap_if_big_endian(std::vector<double>& data) {
  if constexpr (std::endian::native == std::endian::little) {
    (void)data;
  } else {
    for (double& d : data) {
      std::uint64_t bits;
      std::memcpy(&bits, &d, sizeof bits);
      bits = __builtin_bswap64(bits);
      std::memcpy(&d, &bits, sizeof d);
    }
  }
}

void write_payload(std::ostream& out, std::vector<double> data) {
  swap_if_big_endian(data);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

std::vector<double> read_payload(std::istream& in, std::size_t count) {
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated payload");
  swap_if_big_endian(data);
  return data;
}

// Header lines up to "data" as a key -> value map; the magic line is checked.
std::map<std::string, std::string> read_header(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw std::runtime_error(path + ": not a seistune grid file");
  }
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    if (line == "data") return fields;
    auto space = line.find(' ');
    if (space == std::string::npos) {
      throw std::runtime_error(path + ": malformed header line: " + line);
    }
    fields[line.substr(0, space)] = line.substr(space + 1);
  }
  throw std::runtime_error(path + ": missing data marker");
}

const std::string& field(const std::map<std::string, std::string>& fields,
                         const std::string& key, const std::string& path) {
  auto it = fields.find(key);
  if (it == fields.end()) throw std::runtime_error(path + ": missing header field " + key);
  return it->second;
}

std::int64_t int_field(const std::map<std::string, std::string>& fields,
                       const std::string& key, const std::string& path) {
  return std::stoll(field(fields, key, path));
}

double double_field(const std::map<std::string, std::string>& fields,
                    const std::string& key, const std::string& path) {
  return std::stod(field(fields, key, path));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return in;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

void write_model(const std::string& path, const wave::VelocityModel& model) {
  std::ofstream out = open_out(path);
  out << kMagic << "\nkind velocity\nn1 " << model.n1 << "\nn2 " << model.n2
      << "\nn3 " << model.n3 << "\ndx " << fmt(model.dx) << "\ndata\n";
  write_payload(out, model.v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

wave::VelocityModel read_model(const std::string& path) {
  std::ifstream in = open_in(path);
  auto fields = read_header(in, path);
  if (field(fields, "kind", path) != "velocity") {
    throw std::runtime_error(path + ": not a velocity model");
  }
  wave::VelocityModel m;
  m.n1 = int_field(fields, "n1", path);
  m.n2 = int_field(fields, "n2", path);
  m.n3 = int_field(fields, "n3", path);
  m.dx = double_field(fields, "dx", path);
  if (m.n1 < 1 || m.n2 < 1 || m.n3 < 1 || !(m.dx > 0.0)) {
    throw std::runtime_error(path + ": invalid model header");
  }
  m.v = read_payload(in, static_cast<std::size_t>(m.cell_count()));
  return m;
}

void write_seismogram(const std::string& path, const wave::Seismogram& seismogram,
                      double dt) {
  std::ofstream out = open_out(path);
  out << kMagic << "\nkind seismogram\nnt " << seismogram.nt << "\nn_receivers "
      << seismogram.n_receivers << "\ndt " << fmt(dt) << "\ndata\n";
  write_payload(out, seismogram.a);
  if (!out) throw std::runtime_error("write failed: " + path);
}

SeismogramFile read_seismogram(const std::string& path) {
  std::ifstream in = open_in(path);
  auto fields = read_header(in, path);
  if (field(fields, "kind", path) != "seismogram") {
    throw std::runtime_error(path + ": not a seismogram");
  }
  SeismogramFile f;
  f.seismogram.nt = int_field(fields, "nt", path);
  f.seismogram.n_receivers = int_field(fields, "n_receivers", path);
  f.dt = double_field(fields, "dt", path);
  if (f.seismogram.nt < 0 || f.seismogram.n_receivers < 0) {
    throw std::runtime_error(path + ": invalid seismogram header");
  }
  f.seismogram.a = read_payload(
      in, static_cast<std::size_t>(f.seismogram.nt * f.seismogram.n_receivers));
  return f;
}

}  // namespace seistune::io
