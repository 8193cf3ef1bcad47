#include "topo/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "topo/errors.hpp"

namespace topo {

namespace {

// strtod accepts subnormals and nan without throwing.
double parse_field(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (std::isnan(back) && std::isnan(v))) return buf;
  }
  return buf;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

namespace {

// Write-then-rename so partially written artifacts never appear.
void commit(const std::string& path, const std::string& content,
            bool binary = false) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "': " + ec.message());
}

}  // namespace

void write_text_file(const std::string& path, const std::string& content) {
  commit(path, content);
}

void write_iterations_csv(const std::string& path,
                          const std::vector<IterationRecord>& records) {
  std::ostringstream os;
  os << "loop,objective,volume,change_pct,path,epsilon,cg_iters,solve_seconds\n";
  for (const IterationRecord& r : records) {
    os << r.loop << ',' << format_double(r.objective) << ','
       << format_double(r.volume) << ',' << format_double(r.change_pct) << ','
       << r.path << ',' << format_double(r.epsilon) << ',' << r.cg_iterations
       << ',' << format_double(r.solve_seconds) << '\n';
  }
  commit(path, os.str());
}

std::vector<IterationRecord> read_iterations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw IoError("empty iteration log '" + path + "'");
  std::vector<IterationRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    IterationRecord r;
    auto next = [&]() {
      if (!std::getline(ss, field, ','))
        throw IoError("malformed CSV row in '" + path + "'");
      return field;
    };
    r.loop = std::stoi(next());
    r.objective = parse_field(next());
    r.volume = parse_field(next());
    r.change_pct = parse_field(next());
    r.path = next();
    r.epsilon = parse_field(next());
    r.cg_iterations = std::stol(next());
    r.solve_seconds = parse_field(next());
    records.push_back(std::move(r));
  }
  return records;
}

void write_density_pgm(const std::string& path, const StructuredGrid& grid,
                       const std::vector<double>& phys) {
  if (grid.dim != 2) throw ParamError("pgm output is for 2D grids");
  if (static_cast<int>(phys.size()) != grid.element_count())
    throw ParamError("pgm: field size mismatch");
  std::string body;
  body.reserve(phys.size() + 32);
  body += "P5\n" + std::to_string(grid.nelx) + " " + std::to_string(grid.nely) +
          "\n255\n";
  for (int iy = grid.nely - 1; iy >= 0; --iy)
    for (int ix = 0; ix < grid.nelx; ++ix) {
      const double v = std::clamp(phys[grid.element_index(ix, iy)], 0.0, 1.0);
      body.push_back(static_cast<char>(
          static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  commit(path, body, /*binary=*/true);
}

void write_density_vtk(const std::string& path, const StructuredGrid& grid,
                       const std::vector<double>& phys) {
  if (grid.dim != 3) throw ParamError("vtk output is for 3D grids");
  if (static_cast<int>(phys.size()) != grid.element_count())
    throw ParamError("vtk: field size mismatch");
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\n"
     << "density field\n"
     << "ASCII\n"
     << "DATASET STRUCTURED_POINTS\n"
     << "DIMENSIONS " << grid.nelx + 1 << " " << grid.nely + 1 << " "
     << grid.nelz + 1 << "\n"
     << "ORIGIN 0 0 0\n"
     << "SPACING 1 1 1\n"
     << "CELL_DATA " << grid.element_count() << "\n"
     << "SCALARS density float 1\n"
     << "LOOKUP_TABLE default\n";
  for (int e = 0; e < grid.element_count(); ++e) {
    os << static_cast<float>(phys[e]);
    os << (e % 9 == 8 ? '\n' : ' ');
  }
  os << "\n";
  commit(path, os.str());
}

}  // namespace topo
