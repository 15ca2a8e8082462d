#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace rsgda {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Visible/hidden layer sizes. When bias is enabled the last visible
// coordinate is the constant-1 bias input: it counts toward d_v but is never
// corrupted. bias_in_loss controls whether its reconstruction term enters
// the squared loss.
struct NetworkShape {
  int d_v = 0;
  int d_h = 0;
  bool bias = false;
  bool bias_in_loss = true;

  int corruptible() const { return bias ? d_v - 1 : d_v; }
  std::int64_t parameters() const {
    return static_cast<std::int64_t>(d_v) * d_h;
  }
  void validate() const;
};

// Per-coordinate zeroing probability. Coordinates are corrupted
// independently; the bias coordinate is exempt.
struct CorruptionModel {
  double zeta = 0.0;
  void validate() const;
};

// Tied weights: the same d_h x d_v matrix drives encoding sigma(W x~) and
// decoding sigma(W^T h).
struct Weights {
  Matrix m;
  NetworkShape shape;

  static Weights zeros(const NetworkShape& shape);
  // Entries uniform on (-a, a), a = sqrt(6 / (d_h + d_v)).
  static Weights random_init(const NetworkShape& shape, Rng& rng);

  void validate() const;
};

// One realization of the corruption process: clean input, corrupted input,
// and the keep-mask (1 = kept).
struct SamplePair {
  Vector x;
  Vector x_tilde;
  std::vector<std::uint8_t> mask;
};

double sigmoid(double z);

SamplePair corrupt(const Vector& x, const CorruptionModel& model,
                   const NetworkShape& shape, Rng& rng);
// Same draw sequence as corrupt(), writing into an existing pair.
void corrupt_into(SamplePair& pair, const Eigen::Ref<const Vector>& x,
                  const CorruptionModel& model, const NetworkShape& shape,
                  Rng& rng);
SamplePair uncorrupted(const Vector& x);

// || x - sigma(W^T sigma(W x~)) ||^2, in [0, d_v].
double loss(const Weights& w, const SamplePair& pair);

// Exact gradient of loss() with respect to every weight entry, covering both
// the encoder and decoder appearances of W.
Matrix grad(const Weights& w, const SamplePair& pair);

// Forward pass shared by the optimized update path. The gradient is the
// rank-2 matrix  h s^T + d x~^T  with
//   h = sigma(W x~), y = sigma(W^T h),
//   s = 2 (y - x) .* y .* (1 - y)      (decoder error signal)
//   d = (W s) .* h .* (1 - h)          (back-propagated encoder signal)
struct GradFactors {
  Vector h;
  Vector s;
  Vector d;
  // Frobenius norm squared of the rank-2 gradient, computed in O(d_h + d_v).
  double norm_squared(const SamplePair& pair) const;
};
void grad_factors(const Weights& w, const SamplePair& pair, GradFactors& out);

// Exhaustive expectation over corruption masks for a single input. Enumerates
// all 2^c masks over the corruptible coordinates.
inline constexpr int kEnumerationLimit = 20;

double expected_loss_bruteforce(const Weights& w, const Vector& x,
                                const CorruptionModel& model);
Matrix expected_grad_bruteforce(const Weights& w, const Vector& x,
                                const CorruptionModel& model);

}  // namespace rsgda
