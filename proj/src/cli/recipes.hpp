#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "output.hpp"
#include "sqzom/core_model.hpp"

namespace sqzom::cli {

struct RecipeOutput {
  std::vector<Table> tables;  // tables[0] is the figure's main table
  PlotSpec plot;              // plot of tables[0]
};

struct Recipe {
  std::string name;
  std::string description;
  RecipeOutput (*build)(const SystemParams& params, std::uint64_t seed);
};

const std::vector<Recipe>& recipes();
const Recipe* find_recipe(const std::string& name);

}  // namespace sqzom::cli
