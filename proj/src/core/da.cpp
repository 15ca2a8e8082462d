#include "da.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace rsgda {

void NetworkShape::validate() const {
  if (d_v < 1 || d_h < 1)
    fail(ErrorCategory::domain, "network shape requires d_v >= 1 and d_h >= 1");
  if (bias && d_v < 1)
    fail(ErrorCategory::domain, "bias-enabled shape needs the bias coordinate");
}

void CorruptionModel::validate() const {
  if (!(zeta >= 0.0 && zeta <= 1.0))
    fail(ErrorCategory::domain, "corruption probability must lie in [0, 1]");
}

Weights Weights::zeros(const NetworkShape& shape) {
  shape.validate();
  Weights w;
  w.shape = shape;
  w.m = Matrix::Zero(shape.d_h, shape.d_v);
  return w;
}

Weights Weights::random_init(const NetworkShape& shape, Rng& rng) {
  shape.validate();
  const double a = std::sqrt(6.0 / (shape.d_h + shape.d_v));
  Weights w;
  w.shape = shape;
  w.m.resize(shape.d_h, shape.d_v);
  for (int i = 0; i < shape.d_h; ++i)
    for (int j = 0; j < shape.d_v; ++j) w.m(i, j) = rng.uniform(-a, a);
  return w;
}

void Weights::validate() const {
  shape.validate();
  if (m.rows() != shape.d_h || m.cols() != shape.d_v)
    fail(ErrorCategory::dimension, "weight matrix does not match its shape");
  if (!m.allFinite())
    fail(ErrorCategory::domain, "weight matrix has non-finite entries");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

inline void sigmoid_inplace(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = sigmoid(v[i]);
}

void check_input(const Eigen::Ref<const Vector>& x, const NetworkShape& shape) {
  if (x.size() != shape.d_v)
    fail(ErrorCategory::dimension,
         "input length " + std::to_string(x.size()) + " does not match d_v " +
             std::to_string(shape.d_v));
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (!std::isfinite(x[j]) || x[j] < 0.0 || x[j] > 1.0)
      fail(ErrorCategory::domain, "input coordinate " + std::to_string(j) +
                                      " outside [0, 1]");
  }
  if (shape.bias && x[x.size() - 1] != 1.0)
    fail(ErrorCategory::domain, "bias coordinate must equal 1");
}

void check_pair(const Weights& w, const SamplePair& pair) {
  if (w.m.rows() != w.shape.d_h || w.m.cols() != w.shape.d_v)
    fail(ErrorCategory::dimension, "weight matrix does not match its shape");
  if (pair.x.size() != w.shape.d_v || pair.x_tilde.size() != w.shape.d_v)
    fail(ErrorCategory::dimension, "sample pair does not match d_v");
}

}  // namespace

void corrupt_into(SamplePair& pair, const Eigen::Ref<const Vector>& x,
                  const CorruptionModel& model, const NetworkShape& shape,
                  Rng& rng) {
  model.validate();
  check_input(x, shape);
  const Eigen::Index d = x.size();
  pair.x = x;
  pair.x_tilde.resize(d);
  pair.mask.assign(static_cast<std::size_t>(d), 1);
  const Eigen::Index limit = shape.bias ? d - 1 : d;
  for (Eigen::Index j = 0; j < limit; ++j) {
    if (rng.unit() < model.zeta) {
      pair.mask[static_cast<std::size_t>(j)] = 0;
      pair.x_tilde[j] = 0.0;
    } else {
      pair.x_tilde[j] = x[j];
    }
  }
  if (shape.bias) pair.x_tilde[d - 1] = x[d - 1];
}

SamplePair corrupt(const Vector& x, const CorruptionModel& model,
                   const NetworkShape& shape, Rng& rng) {
  SamplePair pair;
  corrupt_into(pair, x, model, shape, rng);
  return pair;
}

SamplePair uncorrupted(const Vector& x) {
  SamplePair pair;
  pair.x = x;
  pair.x_tilde = x;
  pair.mask.assign(static_cast<std::size_t>(x.size()), 1);
  return pair;
}

double loss(const Weights& w, const SamplePair& pair) {
  check_pair(w, pair);
  Vector h = w.m * pair.x_tilde;
  sigmoid_inplace(h);
  Vector y = w.m.transpose() * h;
  sigmoid_inplace(y);
  double total = 0.0;
  const Eigen::Index limit =
      (w.shape.bias && !w.shape.bias_in_loss) ? w.shape.d_v - 1 : w.shape.d_v;
  for (Eigen::Index j = 0; j < limit; ++j) {
    const double e = y[j] - pair.x[j];
    total += e * e;
  }
  return total;
}

void grad_factors(const Weights& w, const SamplePair& pair, GradFactors& out) {
  check_pair(w, pair);
  out.h.noalias() = w.m * pair.x_tilde;
  sigmoid_inplace(out.h);
  out.s.noalias() = w.m.transpose() * out.h;
  sigmoid_inplace(out.s);
  // out.s currently holds y; turn it into the decoder error signal.
  const Eigen::Index limit =
      (w.shape.bias && !w.shape.bias_in_loss) ? w.shape.d_v - 1 : w.shape.d_v;
  for (Eigen::Index j = 0; j < w.shape.d_v; ++j) {
    const double y = out.s[j];
    out.s[j] = (j < limit) ? 2.0 * (y - pair.x[j]) * y * (1.0 - y) : 0.0;
  }
  out.d.noalias() = w.m * out.s;
  for (Eigen::Index i = 0; i < w.shape.d_h; ++i)
    out.d[i] *= out.h[i] * (1.0 - out.h[i]);
}

double GradFactors::norm_squared(const SamplePair& pair) const {
  const double hh = h.squaredNorm();
  const double ss = s.squaredNorm();
  const double dd = d.squaredNorm();
  const double xx = pair.x_tilde.squaredNorm();
  const double hd = h.dot(d);
  const double sx = s.dot(pair.x_tilde);
  return hh * ss + 2.0 * hd * sx + dd * xx;
}

Matrix grad(const Weights& w, const SamplePair& pair) {
  GradFactors f;
  grad_factors(w, pair, f);
  Matrix g = f.h * f.s.transpose();
  g.noalias() += f.d * pair.x_tilde.transpose();
  return g;
}

namespace {

template <typename Accumulate>
void enumerate_masks(const Weights& w, const Vector& x,
                     const CorruptionModel& model, Accumulate&& accumulate) {
  w.validate();
  model.validate();
  check_input(x, w.shape);
  const int c = w.shape.corruptible();
  if (c > kEnumerationLimit)
    fail(ErrorCategory::enumeration_limit,
         "exact expectation limited to " + std::to_string(kEnumerationLimit) +
             " corruptible coordinates, got " + std::to_string(c));

  // zeroed-count / kept-count probability tables; 0^0 == 1 keeps the
  // degenerate zeta = 0 and zeta = 1 cases exact.
  std::vector<double> p_zero(static_cast<std::size_t>(c) + 1, 1.0);
  std::vector<double> p_keep(static_cast<std::size_t>(c) + 1, 1.0);
  for (int i = 1; i <= c; ++i) {
    p_zero[static_cast<std::size_t>(i)] =
        p_zero[static_cast<std::size_t>(i - 1)] * model.zeta;
    p_keep[static_cast<std::size_t>(i)] =
        p_keep[static_cast<std::size_t>(i - 1)] * (1.0 - model.zeta);
  }

  SamplePair pair = uncorrupted(x);
  const std::uint64_t total = std::uint64_t(1) << c;
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    const int zeroed = std::popcount(bits);
    const double prob = p_zero[static_cast<std::size_t>(zeroed)] *
                        p_keep[static_cast<std::size_t>(c - zeroed)];
    if (prob == 0.0) continue;
    for (int j = 0; j < c; ++j) {
      const bool drop = (bits >> j) & 1;
      pair.mask[static_cast<std::size_t>(j)] = drop ? 0 : 1;
      pair.x_tilde[j] = drop ? 0.0 : x[j];
    }
    accumulate(prob, pair);
  }
}

}  // namespace

double expected_loss_bruteforce(const Weights& w, const Vector& x,
                                const CorruptionModel& model) {
  double total = 0.0;
  enumerate_masks(w, x, model, [&](double prob, const SamplePair& pair) {
    total += prob * loss(w, pair);
  });
  return total;
}

Matrix expected_grad_bruteforce(const Weights& w, const Vector& x,
                                const CorruptionModel& model) {
  Matrix total = Matrix::Zero(w.shape.d_h, w.shape.d_v);
  GradFactors f;
  enumerate_masks(w, x, model, [&](double prob, const SamplePair& pair) {
    grad_factors(w, pair, f);
    total.noalias() += prob * (f.h * f.s.transpose());
    total.noalias() += prob * (f.d * pair.x_tilde.transpose());
  });
  return total;
}

}  // namespace rsgda
