#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flowctl/ftle.hpp"

namespace flowctl {

// shortest round-trippable decimal representation ("%.17g")
std::string fmt17(double v);

// first line: x_min,x_max,y_min,y_max,nx,ny; then ny rows of nx values
// (row-major, y outer); masked cells are written as nan
void write_grid_csv(std::ostream& os, const ScalarFieldGrid& grid);

// 8-bit P2 grayscale, normalized over unmasked cells, masked cells black
void write_grid_pgm(std::ostream& os, const ScalarFieldGrid& grid);

void write_ridge_csv(std::ostream& os, const std::vector<RidgePoint>& ridge);

void write_error_records_csv(std::ostream& os, const std::vector<ManifoldErrorRecord>& recs);

// convenience: open for writing or throw config_error
void write_text_file(const std::string& path, const std::string& text);

std::vector<double> linspace(double lo, double hi, int n);

} // namespace flowctl
