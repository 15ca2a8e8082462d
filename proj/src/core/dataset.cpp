#include "dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "rng.hpp"

namespace rsgda {

void Dataset::validate() const {
  if (x.rows() < 1 || x.cols() < 1)
    fail(ErrorCategory::domain, "dataset must be non-empty");
  if (!x.allFinite())
    fail(ErrorCategory::domain, "dataset has non-finite entries");
  if ((x.array() < 0.0).any() || (x.array() > 1.0).any())
    fail(ErrorCategory::domain, "dataset entries must lie in [0, 1]");
  if (has_bias && (x.col(x.cols() - 1).array() != 1.0).any())
    fail(ErrorCategory::domain, "bias column must be identically 1");
}

Dataset Dataset::with_bias() const {
  if (has_bias) return *this;
  Dataset out;
  out.has_bias = true;
  out.x.resize(x.rows(), x.cols() + 1);
  out.x.leftCols(x.cols()) = x;
  out.x.col(x.cols()).setOnes();
  return out;
}

Dataset gen_synthetic(std::uint64_t n, int dims, double rho,
                      std::uint64_t seed) {
  if (n < 1) fail(ErrorCategory::domain, "synthetic dataset needs n >= 1");
  if (dims < 1) fail(ErrorCategory::domain, "synthetic dataset needs dims >= 1");
  if (!(rho >= 0.0 && rho < 1.0))
    fail(ErrorCategory::domain, "pairwise correlation must lie in [0, 1)");

  const double shared = std::sqrt(rho);
  const double own = std::sqrt(1.0 - rho);
  Rng rng(seed);
  Dataset ds;
  ds.x.resize(static_cast<Eigen::Index>(n), dims);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double g0 = rng.normal();
    for (int j = 0; j < dims; ++j) {
      const double z = shared * g0 + own * rng.normal();
      ds.x(static_cast<Eigen::Index>(i), j) = sigmoid(z);
    }
  }
  return ds;
}

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803u;

std::uint32_t read_be32(std::ifstream& in, const std::string& path,
                        std::uint64_t offset) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4)
    fail(ErrorCategory::format,
         path + ": truncated at byte offset " +
             std::to_string(offset + static_cast<std::uint64_t>(in.gcount())));
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::io, path + ": cannot open");

  const std::uint32_t magic = read_be32(in, path, 0);
  if (magic != kImageMagic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%08x", magic);
    fail(ErrorCategory::format,
         path + ": wrong magic " + buf + " at byte offset 0, expected 0x00000803");
  }
  const std::uint64_t n = read_be32(in, path, 4);
  const std::uint64_t rows = read_be32(in, path, 8);
  const std::uint64_t cols = read_be32(in, path, 12);
  if (n == 0 || rows == 0 || cols == 0)
    fail(ErrorCategory::format, path + ": zero-sized dimension in header");
  const std::uint64_t dim = rows * cols;
  if (dim > (1u << 24) || n > (1u << 28) || n * dim > (std::uint64_t(1) << 33))
    fail(ErrorCategory::format, path + ": dimension overflow in header");

  Dataset ds;
  ds.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::vector<unsigned char> row(dim);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(dim));
    if (static_cast<std::uint64_t>(in.gcount()) != dim)
      fail(ErrorCategory::format,
           path + ": truncated at byte offset " +
               std::to_string(16 + i * dim +
                              static_cast<std::uint64_t>(in.gcount())));
    for (std::uint64_t j = 0; j < dim; ++j)
      ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          row[j] / 255.0;
  }
  return ds;
}

void write_idx(const Dataset& ds, const std::string& path, int rows,
               int cols) {
  const int data_dim = ds.has_bias ? ds.dim() - 1 : ds.dim();
  if (rows < 1 || cols < 1 || rows * cols != data_dim)
    fail(ErrorCategory::dimension,
         "rows * cols must equal the data dimension " +
             std::to_string(data_dim));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::io, path + ": cannot open for writing");
  write_be32(out, kImageMagic);
  write_be32(out, static_cast<std::uint32_t>(ds.size()));
  write_be32(out, static_cast<std::uint32_t>(rows));
  write_be32(out, static_cast<std::uint32_t>(cols));
  std::vector<unsigned char> row(static_cast<std::size_t>(data_dim));
  for (std::uint64_t i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < data_dim; ++j) {
      const double v = ds.x(static_cast<Eigen::Index>(i), j);
      row[static_cast<std::size_t>(j)] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(row.data()), data_dim);
  }
  if (!out) fail(ErrorCategory::io, path + ": write failed");
}

}  // namespace rsgda
