#pragma once

#include <optional>
#include <span>

#include "graphkrig/numerics.hpp"

namespace graphkrig {

/// Mean squared error of pred against truth over node indices idx.
double mse(const Vector& pred, const Vector& truth, std::span<const std::size_t> idx);

/// Pair-counting AUC: (#concordant + #ties/2) / (#pos * #neg) over idx.
/// Labels are +1 / -1. Empty when idx holds a single class.
std::optional<double> auc(const Vector& scores, const Vector& labels,
                          std::span<const std::size_t> idx);

}  // namespace graphkrig
