#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace holespin {

/// (x, y[, sigma]) samples with optional label and probe-power metadata.
struct DataSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::optional<std::vector<double>> sigma;
  std::string label;
  std::optional<double> power;  ///< uW

  std::size_t size() const { return x.size(); }

  /// Equal lengths, strictly increasing x, finite values, sigma > 0.
  /// Throws ValidationError.
  void validate() const;
};

}  // namespace holespin
