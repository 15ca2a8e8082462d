#include "oracle.hpp"

namespace rsgda {

namespace {

void check_dataset(const Weights& w, const Dataset& ds) {
  ds.validate();
  if (ds.dim() != w.shape.d_v)
    fail(ErrorCategory::dimension, "dataset dimension does not match d_v");
  if (ds.has_bias != w.shape.bias)
    fail(ErrorCategory::dimension, "dataset bias column does not match shape");
}

bool exact_affordable(const Weights& w, const Dataset& ds,
                      std::uint64_t cost_cap) {
  const int c = w.shape.corruptible();
  if (c > kEnumerationLimit) return false;
  const std::uint64_t masks = std::uint64_t(1) << c;
  return masks * ds.size() <= cost_cap;
}

// Accumulates the mean gradient of `draws` sampled (instance, mask) pairs.
void accumulate_mc_grad(Matrix& sum, const Weights& w, const Dataset& ds,
                        const CorruptionModel& model, std::uint64_t draws,
                        Rng& rng) {
  SamplePair pair;
  GradFactors f;
  for (std::uint64_t k = 0; k < draws; ++k) {
    const std::uint64_t i = rng.below(ds.size());
    corrupt_into(pair, ds.instance(i), model, w.shape, rng);
    grad_factors(w, pair, f);
    sum.noalias() += f.h * f.s.transpose();
    sum.noalias() += f.d * pair.x_tilde.transpose();
  }
  sum /= static_cast<double>(draws);
}

}  // namespace

double dataset_expected_loss(const Weights& w, const Dataset& ds,
                             const CorruptionModel& model) {
  check_dataset(w, ds);
  double total = 0.0;
  for (std::uint64_t i = 0; i < ds.size(); ++i)
    total += expected_loss_bruteforce(w, ds.instance(i), model);
  return total / static_cast<double>(ds.size());
}

Matrix dataset_expected_grad(const Weights& w, const Dataset& ds,
                             const CorruptionModel& model) {
  check_dataset(w, ds);
  Matrix total = Matrix::Zero(w.shape.d_h, w.shape.d_v);
  for (std::uint64_t i = 0; i < ds.size(); ++i)
    total += expected_grad_bruteforce(w, ds.instance(i), model);
  return total / static_cast<double>(ds.size());
}

double mc_loss_estimate(const Weights& w, const Dataset& ds,
                        const CorruptionModel& model, std::uint64_t draws,
                        Rng rng) {
  check_dataset(w, ds);
  if (draws == 0) fail(ErrorCategory::domain, "draw count must be positive");
  double total = 0.0;
  SamplePair pair;
  for (std::uint64_t k = 0; k < draws; ++k) {
    const std::uint64_t i = rng.below(ds.size());
    corrupt_into(pair, ds.instance(i), model, w.shape, rng);
    total += loss(w, pair);
  }
  return total / static_cast<double>(draws);
}

Matrix mc_grad_estimate(const Weights& w, const Dataset& ds,
                        const CorruptionModel& model, std::uint64_t draws,
                        Rng rng) {
  check_dataset(w, ds);
  if (draws == 0) fail(ErrorCategory::domain, "draw count must be positive");
  Matrix sum = Matrix::Zero(w.shape.d_h, w.shape.d_v);
  accumulate_mc_grad(sum, w, ds, model, draws, rng);
  return sum;
}

double mc_grad_norm_estimate(const Weights& w, const Dataset& ds,
                             const CorruptionModel& model, std::uint64_t draws,
                             Rng rng) {
  check_dataset(w, ds);
  const std::uint64_t half = draws / 2;
  if (half == 0) fail(ErrorCategory::domain, "need at least 2 draws");
  Matrix g1 = Matrix::Zero(w.shape.d_h, w.shape.d_v);
  Matrix g2 = Matrix::Zero(w.shape.d_h, w.shape.d_v);
  accumulate_mc_grad(g1, w, ds, model, half, rng);
  accumulate_mc_grad(g2, w, ds, model, half, rng);
  return g1.cwiseProduct(g2).sum();
}

double grad_norm_estimate(const Weights& w, const Dataset& ds,
                          const CorruptionModel& model,
                          const GradNormPolicy& policy, Rng rng) {
  const bool exact =
      policy.mode == GradNormPolicy::Mode::exact ||
      (policy.mode == GradNormPolicy::Mode::automatic &&
       exact_affordable(w, ds, policy.exact_cost_cap));
  if (exact) return dataset_expected_grad(w, ds, model).squaredNorm();
  return mc_grad_norm_estimate(w, ds, model, policy.draws, rng);
}

double objective_estimate(const Weights& w, const Dataset& ds,
                          const CorruptionModel& model,
                          const ObjectivePolicy& policy, Rng rng) {
  const bool exact =
      policy.mode == ObjectivePolicy::Mode::exact ||
      (policy.mode == ObjectivePolicy::Mode::automatic &&
       exact_affordable(w, ds, policy.exact_cost_cap));
  if (exact) return dataset_expected_loss(w, ds, model);
  return mc_loss_estimate(w, ds, model, policy.draws, rng);
}

}  // namespace rsgda
