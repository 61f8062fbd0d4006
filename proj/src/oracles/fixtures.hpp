#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mckv/density.hpp"
#include "mckv/potential.hpp"

namespace mckv::fixtures {

/// V = -1 on |x| <= 1.
PotentialSpec pure_well();
/// V = max(0, 1 - |x|), positive type in d = 1.
PotentialSpec tent();
/// +4 on |x| <= 0.5, -1 on 0.5 < |x| <= 1.
PotentialSpec core_shell_1d();
/// +20 on |x| <= 0.5, -1 on 0.5 < |x| <= 1.
PotentialSpec core_shell_2d();

/// Strictly positive density with O(1) fluctuations, deterministic in seed.
DensityField random_density(const TorusSpec& spec, std::uint64_t seed);

struct Table {
  std::vector<std::string> provenance;  ///< lines written as "# ..." before the header
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

void write_table(const std::filesystem::path& path, const Table& table);
Table read_table(const std::filesystem::path& path);

/// Oracle values: spectrum.csv, energy.csv, two_point.csv.
std::vector<std::filesystem::path> generate_oracle_fixtures(const std::filesystem::path& dir);

}  // namespace mckv::fixtures
