#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "whf/grid.hpp"

namespace whf {

/// ScalarField CSV: a `# grid d=<d> n=<n>` header line, then one value per
/// line in row-major cell order. Values are written with 17 significant
/// digits so a write/read cycle is lossless.
void write_field_csv(std::ostream& out, const ScalarField& f);
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);
ScalarField read_field_csv(std::istream& in);
ScalarField read_field_csv(const std::filesystem::path& path);

/// Complex samples as `re,im` rows after the same grid header.
void write_complex_csv(const std::filesystem::path& path, const Grid& grid,
                       const std::vector<std::complex<double>>& values);

/// Shortest round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

}  // namespace whf
