#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace catdist {

using Index = std::size_t;
using Code = std::uint32_t;

// Row-major so that profile rows and distance rows are contiguous spans.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace catdist
