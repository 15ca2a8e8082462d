#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "rsg.hpp"
#include "schedule.hpp"

namespace rsgda {

// Corruption probability a sub-network must apply so that, combined with the
// clamping of the visible units it does not own, the parent corruption level
// zeta is reproduced: q = 1 - (1 - zeta) / tau. Feasible for 1 - zeta < tau < 1.
double subda_corruption(double zeta, double tau);

// Smallest number of independently sampled sub-networks keeping the
// probability that some visible unit is never covered below phi:
// ceil(log(phi) / log(1 - tau)), at least 1.
std::uint64_t min_subda_count(double tau, double phi);

enum class PlanMode { disjoint_partition, with_replacement };

// Decomposition of a d_v-wide network into B sub-networks over ceil(tau * n)
// visible units each (n = non-bias units). The bias column, when present,
// is replicated into every sub-network and excluded from coverage counting.
struct SubDAPlan {
  NetworkShape shape;  // full network
  double zeta = 0.0;
  double tau = 0.0;
  double q = 0.0;
  double phi = 0.0;
  PlanMode mode = PlanMode::disjoint_partition;
  std::uint64_t B = 0;
  std::uint64_t M = 1;     // meta-iterations
  std::uint64_t seed = 0;  // drives the subset draws of every meta-iteration
  std::vector<std::vector<int>> subsets;  // meta-iteration 0, data-unit indices
};

struct PlanOptions {
  // Replace an infeasible q = 1 - (1 - zeta) / tau by 0 instead of failing.
  bool clamp_q = false;
  // with_replacement only: request more sub-networks than the coverage bound.
  std::uint64_t B_override = 0;
};

// tau == 1 is accepted as the degenerate single-block plan with q == zeta.
SubDAPlan plan_subdas(const NetworkShape& shape, double zeta, double tau,
                      double phi, PlanMode mode, std::uint64_t M,
                      std::uint64_t seed, const PlanOptions& opts = {});

// Fresh subsets for a given meta-iteration, deterministic in (plan.seed, meta).
std::vector<std::vector<int>> subsets_for_meta(const SubDAPlan& plan,
                                               std::uint64_t meta);

enum class ExecutionMode { sequential, parallel };

struct DdaOptions {
  // Non-distributed iterations run before the sub-network phase.
  std::uint64_t warm_start = 200;
  double warm_D = 1.0;
  int workers = 0;  // parallel mode: 0 means one per sub-network
};

struct SubRunTrace {
  std::uint64_t meta = 0;
  std::uint64_t block = 0;
  std::vector<double> grad_norm_history;
};

struct DdaResult {
  Weights w;  // final shared parameters
  SubDAPlan plan;
  std::vector<SubRunTrace> traces;  // meta-major, block-minor
  double wall_ms = 0.0;             // sub-network phase only
};

// Runs M meta-iterations of B sub-network updates against the shared W.
// Every sub-network reads its own column block (plus the bias column) as of
// the meta-iteration start, runs n_per_subda restricted updates with
// corruption plan.q, and commits at the meta-iteration barrier; commits land
// in block order, so the bias column takes the last block's value. Sequential
// and parallel execution of a disjoint plan are bit-identical by construction.
DdaResult run_distributed(const SubDAPlan& plan, const Dataset& ds,
                          const StepSchedule& schedule,
                          std::uint64_t n_per_subda, ExecutionMode exec,
                          std::uint64_t seed, const DdaOptions& opts = {});

struct DdaBounds {
  double gamma_b = 0.0;  // D / (sqrt(N) (tau d_h d_v)^{3/4})
  double bound = 0.0;    // (D_f/(B D) + D L^2 L') (tau d_h d_v)^{3/4} / sqrt(N)
};

DdaBounds dda_bounds(double D, double D_f, const LipschitzEstimate& lip,
                     std::uint64_t N, std::uint64_t B, double tau,
                     const NetworkShape& shape);

struct DdaSampleSize {
  double r = 0.0, delta = 0.0, epsilon = 0.0, t = 0.0, tau = 0.0;
  std::uint64_t M = 0;
  std::uint64_t S = 0;
};

DdaSampleSize dda_sample_size(double r, double delta, double epsilon, double t,
                              double tau, const NetworkShape& shape);

struct SpeedupPoint {
  std::uint64_t B = 0;
  double wall_ms = 0.0;
  double ratio = 0.0;  // non-distributed wall-clock over this point's
};

struct SpeedupOptions {
  std::uint64_t meta_iterations = 1;
  double D = 1.0;
  bool clamp_q = true;
};

// Times B parallel sub-networks (one worker per sub-network, tau = 1/B,
// fixed per-sub-network iteration count) against the plain single-network
// run. B == 1 is the baseline and reports ratio 1.
std::vector<SpeedupPoint> measure_speedup(const Dataset& ds, int d_h,
                                          double zeta,
                                          const std::vector<std::uint64_t>& b_sweep,
                                          std::uint64_t n_per_subda,
                                          std::uint64_t seed,
                                          const SpeedupOptions& opts = {});

}  // namespace rsgda
