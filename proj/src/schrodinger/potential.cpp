#include <algorithm>

#include "dlab/error.hpp"
#include "dlab/schrodinger.hpp"

namespace dlab {
namespace {

void finish(PotentialGrid& p) {
  p.max_value = p.values.empty() ? 0.0 : *std::max_element(p.values.begin(), p.values.end());
  const double floor = -1e-14 * std::max(p.max_value, 0.0);
  p.nonneg = std::all_of(p.values.begin(), p.values.end(), [&](double v) { return v >= floor; });
}

std::vector<std::vector<double>> samples(const ProfileFamily& family, const TorusGrid& grid) {
  std::vector<std::vector<double>> s(family.size(), std::vector<double>(grid.n()));
  for (std::size_t j = 0; j < family.size(); ++j)
    for (int i = 0; i < grid.n(); ++i) s[j][i] = family[j](grid.coordinate(i));
  return s;
}

}  // namespace

PotentialGrid assemble_potential_2d(const ProfileFamily& family, const TorusGrid& grid) {
  if (family.size() == 0) throw ConfigError("schrodinger", "assemble_potential_2d", "family is empty");
  if (grid.dim() != 2) throw ConfigError("schrodinger", "assemble_potential_2d", "grid must be two-dimensional");
  const int n = grid.n();
  const auto s = samples(family, grid);
  PotentialGrid p{grid, std::vector<double>(grid.size(), 0.0), true, "two-point", 0.0};
  for (const auto& sj : s) {
    for (int i = 0; i < n; ++i) {
      double* row = p.values.data() + static_cast<std::size_t>(i) * n;
      for (int k = 0; k < n; ++k) {
        const double d = sj[i] - sj[k];
        row[k] += d * d;
      }
    }
  }
  finish(p);
  return p;
}

PotentialGrid assemble_potential_1d(const ProfileFamily& family, const TorusGrid& grid, double y0) {
  if (family.size() == 0) throw ConfigError("schrodinger", "assemble_potential_1d", "family is empty");
  if (grid.dim() != 1) throw ConfigError("schrodinger", "assemble_potential_1d", "grid must be one-dimensional");
  PotentialGrid p{grid, std::vector<double>(grid.size(), 0.0), true, "pinned", 0.0};
  for (const auto& u : family.profiles()) {
    const double u0 = u(y0);
    for (int i = 0; i < grid.n(); ++i) {
      const double d = u(grid.coordinate(i)) - u0;
      p.values[i] += d * d;
    }
  }
  finish(p);
  return p;
}

PotentialGrid constant_potential(const TorusGrid& grid, double value) {
  PotentialGrid p{grid, std::vector<double>(grid.size(), value), true, "constant", 0.0};
  finish(p);
  return p;
}

}  // namespace dlab
