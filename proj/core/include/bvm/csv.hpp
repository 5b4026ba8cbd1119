#pragma once

#include <ostream>
#include <string>

#include "bvm/engine.hpp"

namespace bvm {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double x, int decimals);

/// "gamma,epsilon,p_agree", one row per cell, gamma-major.
void write_sweep_csv(std::ostream& out, const SweepGrid& grid);

/// "gamma,epsilon,ratio,status"; ratio is empty unless status is ok.
/// Both grids must share axes.
void write_ratio_csv(std::ostream& out, const SweepGrid& grid, const SweepGrid& grid_alt);

}  // namespace bvm
