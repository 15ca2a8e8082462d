#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "oracle.hpp"
#include "schedule.hpp"

namespace rsgda {

struct LipschitzOptions {
  // Instances averaged per probe when estimating the gradient constant.
  std::uint64_t grad_instances = 16;
};

// Samples loss (and dataset-mean gradient) secants over random weight pairs
// differing in a single coordinate, probe entries uniform on [-3, 3]. The
// estimates are running maxima, so growing the probe count never lowers them,
// and each probe draws from its own split stream, so results are replayable.
LipschitzEstimate estimate_lipschitz(const Dataset& ds,
                                     const CorruptionModel& model,
                                     const NetworkShape& shape,
                                     std::uint64_t probes, Rng rng,
                                     const LipschitzOptions& opts = {});

struct StoppingRule {
  enum class Kind { sampled, min_grad_tail, last };
  Kind kind = Kind::last;
  StoppingDistribution distribution;  // sampled
  std::uint64_t tail = 100;           // min_grad_tail

  static StoppingRule sampled(StoppingDistribution dist);
  static StoppingRule min_grad_tail(std::uint64_t n1);
  static StoppingRule last();
};

// Caller-supplied estimator evaluated at selected iterations, before the
// update at that iteration. Receives a per-call split stream.
struct GradProbe {
  std::vector<std::uint64_t> iterations;  // sorted, 1-based
  std::function<double(const Weights& w, std::uint64_t k, Rng& rng)> estimator;
};

struct RsgOptions {
  std::uint64_t f_eval_stride = 0;  // 0: N / 16
  ObjectivePolicy f_eval;           // f_eval.draws == 0 disables f tracking
  GradProbe probe;
  const Weights* init = nullptr;  // overrides the seeded initialization
};

struct RSGRun {
  std::uint64_t seed = 0;
  std::uint64_t iterations = 0;      // N
  std::uint64_t stop_iteration = 0;  // R in 1..N
  Weights w_final;                   // parameters at iteration R
  Weights w_end;                     // parameters after all N updates
  std::vector<double> grad_norm_history;  // ||G||^2 per iteration
  std::vector<std::pair<std::uint64_t, double>> probe_history;
  double f_initial = 0.0;
  double f_best = 0.0;
  bool f_tracked = false;
  double avg_instance_uses = 0.0;  // oracle calls per instance, N / n
};

// Runs N stochastic updates W <- W - gamma_k G(eta_k; W), one uniformly drawn
// instance and one corruption mask per iteration. The returned parameters are
// taken at the stopping iteration R chosen by `stopping`:
//   sampled        R drawn up front from the given stopping law
//   min_grad_tail  R = argmin of ||G||^2 over the last `tail` iterations
//   last           R = N
RSGRun rsg_run(const Dataset& ds, const CorruptionModel& model,
               const NetworkShape& shape, const StepSchedule& schedule,
               std::uint64_t N, const StoppingRule& stopping,
               std::uint64_t seed, const RsgOptions& opts = {});

struct FoldSelection {
  std::size_t index = 0;
  double score = 0.0;
  std::vector<double> scores;  // ||grad f||^2 estimate per run
};

// Scores each run's final parameters by the gradient-norm oracle and returns
// the argmin; ties resolve to the lowest run index.
FoldSelection multi_fold_select(const std::vector<RSGRun>& runs,
                                const Dataset& ds,
                                const CorruptionModel& model,
                                const GradNormPolicy& policy = {},
                                std::uint64_t score_seed = 0x5eed5c0ULL);

}  // namespace rsgda
