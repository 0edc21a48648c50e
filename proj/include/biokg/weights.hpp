#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "biokg/schema.hpp"

namespace biokg {

struct WeightScheme {
    std::string name;
    std::array<double, kFieldCount> weights{};  // schema field order
};

// Each weight in [0,1], sum within 1e-3 of 1. Throws ConfigError.
void validate_scheme(const WeightScheme& scheme);

// The ten embedded weighting schemes: Average Distribution, Property
// Importance, Random 1 .. Random 8.
const std::vector<WeightScheme>& builtin_weight_schemes();

// Tab-separated scheme table: a header line with scheme names after the
// leading No./Component columns, then 14 component rows.
std::vector<WeightScheme> load_weight_schemes(const std::string& path);

// Name lookup ignoring case, spaces, hyphens and underscores, so
// "random1" and "Random 1" both resolve.
const WeightScheme* find_scheme(const std::vector<WeightScheme>& schemes, std::string_view name);

std::string normalize_scheme_name(std::string_view name);

}  // namespace biokg
