#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "da.hpp"

namespace rsgda {

// Row-major so an instance is a contiguous slice.
using DataMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Training inputs, one instance per row, entries in [0, 1]. When has_bias is
// set the last column is identically 1.
struct Dataset {
  DataMatrix x;
  bool has_bias = false;

  std::uint64_t size() const { return static_cast<std::uint64_t>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }
  Eigen::Ref<const Vector> instance(std::uint64_t i) const {
    return x.row(static_cast<Eigen::Index>(i)).transpose();
  }

  // Copy with the constant-1 bias column appended.
  Dataset with_bias() const;

  NetworkShape shape_for(int d_h, bool bias_in_loss = true) const {
    return NetworkShape{dim(), d_h, has_bias, bias_in_loss};
  }

  void validate() const;
};

// Latent Gaussian vectors with constant pairwise correlation rho, squashed
// into [0, 1] through the logistic function. Deterministic per seed.
Dataset gen_synthetic(std::uint64_t n, int dims, double rho,
                      std::uint64_t seed);

// IDX image file (big-endian magic 0x00000803, then n/rows/cols as big-endian
// 32-bit counts, then n*rows*cols unsigned bytes). Pixels map to [0, 1] by
// dividing by 255. Rows are flattened into rows*cols columns.
Dataset load_idx(const std::string& path);

// Inverse of load_idx up to the 1/255 quantization. rows * cols must equal
// the dataset dimension (bias column excluded if present).
void write_idx(const Dataset& ds, const std::string& path, int rows, int cols);

}  // namespace rsgda
