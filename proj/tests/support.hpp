#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "cwcs/form.hpp"
#include "cwcs/random_fields.hpp"

namespace cwcs::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline GridPtr torus(int dim, int n) {
  return std::make_shared<const ChartGrid>(std::vector<int>(dim, n), std::vector<bool>(dim, true));
}

using cwcs::RandomField;
using cwcs::random_form;

}  // namespace cwcs::testing
