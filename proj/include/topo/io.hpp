#pragma once

#include <string>
#include <vector>

#include "topo/grid.hpp"
#include "topo/optimizer.hpp"

namespace topo {

// Shortest digit string that round-trips the double exactly.
std::string format_double(double v);

void ensure_directory(const std::string& dir);

// One row per iteration, header:
// loop,objective,volume,change_pct,path,epsilon,cg_iters,solve_seconds
void write_iterations_csv(const std::string& path,
                          const std::vector<IterationRecord>& records);
std::vector<IterationRecord> read_iterations_csv(const std::string& path);

// 8-bit binary PGM of the physical densities, 255 = solid. Rows run from
// the top of the domain down so the image appears upright.
void write_density_pgm(const std::string& path, const StructuredGrid& grid,
                       const std::vector<double>& phys);

// Legacy-ASCII VTK structured points with the densities as CELL_DATA.
void write_density_vtk(const std::string& path, const StructuredGrid& grid,
                       const std::vector<double>& phys);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace topo
