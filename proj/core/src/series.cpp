#include "holespin/series.hpp"

#include "holespin/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace holespin {

void DataSeries::validate() const {
  if (x.size() != y.size())
    throw ValidationError(fmt::format("series '{}': x has {} points but y has {}", label, x.size(), y.size()));
  if (sigma && sigma->size() != x.size())
    throw ValidationError(fmt::format("series '{}': sigma has {} points, expected {}", label, sigma->size(), x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ValidationError(fmt::format("series '{}': non-finite value at row {}", label, i));
    if (i > 0 && !(x[i] > x[i - 1]))
      throw ValidationError(fmt::format("series '{}': x must be strictly increasing (row {})", label, i));
    if (sigma && !((*sigma)[i] > 0.0))
      throw ValidationError(fmt::format("series '{}': sigma must be > 0 (row {})", label, i));
  }
}

}  // namespace holespin
