#include "whf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "whf/error.hpp"

namespace whf {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_header(std::ostream& out, const Grid& g) {
  out << "# grid d=" << g.dim() << " n=" << g.n() << '\n';
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_field_csv(std::ostream& out, const ScalarField& f) {
  write_header(out, f.grid);
  for (double v : f.values) out << format_double(v) << '\n';
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  auto out = open_for_write(path);
  write_field_csv(out, f);
}

ScalarField read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "field CSV is empty");
  int dim = 0, n = 0;
  if (std::sscanf(line.c_str(), "# grid d=%d n=%d", &dim, &n) != 2) {
    throw Error(ErrorKind::Io, "field CSV header must read '# grid d=<d> n=<n>', got '" + line + "'");
  }
  Grid grid(dim, n);
  std::vector<double> values;
  values.reserve(grid.size());
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Io, "field CSV: cannot parse value '" + line + "'");
    }
    values.push_back(v);
  }
  if (values.size() != grid.size()) {
    throw Error(ErrorKind::Io, "field CSV: expected " + std::to_string(grid.size()) + " values, read " +
                                   std::to_string(values.size()));
  }
  ScalarField f(grid, std::move(values));
  require_finite(f, "field CSV");
  return f;
}

ScalarField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_field_csv(in);
}

void write_complex_csv(const std::filesystem::path& path, const Grid& grid,
                       const std::vector<std::complex<double>>& values) {
  auto out = open_for_write(path);
  write_header(out, grid);
  out << "re,im\n";
  for (const auto& z : values) out << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
}

}  // namespace whf
