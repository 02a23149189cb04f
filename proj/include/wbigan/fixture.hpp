#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wbigan {

// Synthetic connection records in the KDD-99 text format. The majority class carries attack
// labels (so it becomes the normal class after the label swap) and is drawn from two
// clusters; the minority records are labelled "normal." and are shifted by 3 standard
// deviations in every continuous feature with their categorical values permuted.
struct FixtureOptions {
  std::size_t majority = 1600;
  std::size_t minority = 400;
  std::uint64_t seed = 2024;
};

std::vector<std::string> synthesize_kdd_lines(const FixtureOptions& options);
void write_kdd_fixture(const std::filesystem::path& path, const FixtureOptions& options);

}  // namespace wbigan
