#pragma once

#include <cstdint>

#include "da.hpp"
#include "dataset.hpp"

namespace rsgda {

// Deterministic objective and gradient of the corruption expectation averaged
// over a dataset. Exact in the masks, O(n * 2^c).
double dataset_expected_loss(const Weights& w, const Dataset& ds,
                             const CorruptionModel& model);
Matrix dataset_expected_grad(const Weights& w, const Dataset& ds,
                             const CorruptionModel& model);

// Seeded Monte Carlo over (instance, mask) draws.
double mc_loss_estimate(const Weights& w, const Dataset& ds,
                        const CorruptionModel& model, std::uint64_t draws,
                        Rng rng);
Matrix mc_grad_estimate(const Weights& w, const Dataset& ds,
                        const CorruptionModel& model, std::uint64_t draws,
                        Rng rng);

// Unbiased Monte Carlo estimate of ||grad f||^2: the draws are split in half
// and the two independent mean gradients are contracted, so the squared-norm
// bias of a single mean estimate cancels.
double mc_grad_norm_estimate(const Weights& w, const Dataset& ds,
                             const CorruptionModel& model, std::uint64_t draws,
                             Rng rng);

// Scoring policy: exact enumeration when the mask space is affordable,
// otherwise Monte Carlo with a fixed draw count.
struct GradNormPolicy {
  enum class Mode { automatic, exact, monte_carlo };
  Mode mode = Mode::automatic;
  std::uint64_t draws = 10000;
  std::uint64_t exact_cost_cap = 40'000'000;  // mask evaluations * instances
};

double grad_norm_estimate(const Weights& w, const Dataset& ds,
                          const CorruptionModel& model,
                          const GradNormPolicy& policy, Rng rng);

struct ObjectivePolicy {
  enum class Mode { automatic, exact, monte_carlo };
  Mode mode = Mode::automatic;
  std::uint64_t draws = 512;
  std::uint64_t exact_cost_cap = 2'000'000;
};

double objective_estimate(const Weights& w, const Dataset& ds,
                          const CorruptionModel& model,
                          const ObjectivePolicy& policy, Rng rng);

}  // namespace rsgda
