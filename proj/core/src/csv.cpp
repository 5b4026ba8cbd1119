#include "bvm/csv.hpp"

#include <array>
#include <charconv>

#include "bvm/error.hpp"

namespace bvm {

std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string format_fixed(double x, int decimals) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::fixed, decimals);
  if (res.ec != std::errc{}) throw Error("format_fixed: value too large");
  return std::string(buf.data(), res.ptr);
}

void write_sweep_csv(std::ostream& out, const SweepGrid& grid) {
  out << "gamma,epsilon,p_agree\n";
  for (std::size_t g = 0; g < grid.gammas.size(); ++g) {
    for (std::size_t e = 0; e < grid.epsilons.size(); ++e) {
      out << format_double(grid.gammas[g]) << ',' << format_double(grid.epsilons[e]) << ','
          << format_double(grid.at(g, e).p) << '\n';
    }
  }
}

void write_ratio_csv(std::ostream& out, const SweepGrid& grid, const SweepGrid& grid_alt) {
  if (grid.gammas != grid_alt.gammas || grid.epsilons != grid_alt.epsilons) {
    throw Error("write_ratio_csv: grids have different axes");
  }
  const auto ratios = cell_ratios(grid, grid_alt);
  out << "gamma,epsilon,ratio,status\n";
  for (std::size_t g = 0; g < grid.gammas.size(); ++g) {
    for (std::size_t e = 0; e < grid.epsilons.size(); ++e) {
      const auto& r = ratios[g * grid.epsilons.size() + e];
      out << format_double(grid.gammas[g]) << ',' << format_double(grid.epsilons[e]) << ','
          << (r.status == RatioStatus::ok ? format_double(r.value) : std::string()) << ',' << status_name(r.status)
          << '\n';
    }
  }
}

}  // namespace bvm
