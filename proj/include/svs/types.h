#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace svs {

/// Row-major so that one row is one frame (or one phoneme) in every table.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-phoneme frame counts. Every entry is >= 1 and the sum is the frame
/// count of the utterance.
struct Durations {
  std::vector<int> d;

  std::size_t size() const noexcept { return d.size(); }
  std::size_t total() const noexcept {
    std::size_t t = 0;
    for (int v : d) t += static_cast<std::size_t>(v);
    return t;
  }
  bool operator==(const Durations&) const = default;
};

}  // namespace svs
