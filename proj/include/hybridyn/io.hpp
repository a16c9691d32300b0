#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "hybridyn/field.hpp"

namespace hybridyn {

// 17 significant digits: enough to round-trip any double, so repeated runs
// of a deterministic pipeline produce byte-identical files.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);  // binary: LF line endings everywhere
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

// Row-major over x, matching PhaseGrid::idx, so files are stable across runs.
inline void write_scalar_field_csv(const std::filesystem::path& path,
                                   const ScalarField& f) {
  std::ofstream os = open_out(path);
  os << "x,p,value\n";
  for (int i = 0; i < f.grid.n_x; ++i)
    for (int j = 0; j < f.grid.n_p; ++j)
      os << fmt17(f.grid.x(i)) << ',' << fmt17(f.grid.p(j)) << ','
         << fmt17(f.at(i, j)) << '\n';
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace hybridyn
