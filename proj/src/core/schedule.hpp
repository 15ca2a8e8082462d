#pragma once

#include <cstdint>
#include <vector>

#include "da.hpp"
#include "rng.hpp"

namespace rsgda {

// Empirical regularity constants of the loss (L, per-coordinate loss slope)
// and of the objective gradient (L_prime, per-coordinate gradient slope).
struct LipschitzEstimate {
  double L = 0.0;
  double L_prime = 0.0;
  std::uint64_t probes = 0;
};

// sqrt(d_h * d_v) * L', the scale against which step sizes are judged.
double gradient_lipschitz(const LipschitzEstimate& lip,
                          const NetworkShape& shape);

// Step-size sequence gamma_k, k >= 1.
//   constant          gamma_k = gamma
//   constant_optimal  gamma_k = D / (sqrt(N) (d_h d_v)^{3/4})
//   polynomial        gamma_k = gamma1 / k^p
struct StepSchedule {
  enum class Kind { constant, constant_optimal, polynomial };

  Kind kind = Kind::constant;
  double gamma = 0.0;   // constant / constant_optimal (resolved value)
  double D = 0.0;       // constant_optimal
  std::uint64_t n_ref = 0;
  double gamma1 = 0.0;  // polynomial
  double p = 0.0;

  double at(std::uint64_t k) const;
  const char* kind_name() const;

  static StepSchedule constant(double gamma);
  static StepSchedule constant_optimal(double D, std::uint64_t N,
                                       const NetworkShape& shape,
                                       const LipschitzEstimate* lip = nullptr);
  static StepSchedule polynomial(double gamma1, double p);
};

// gamma = D / (sqrt(N) (d_h d_v)^{3/4}). When a Lipschitz estimate is given,
// enforces D <= sqrt(N) (d_h d_v)^{1/4} / L'.
double optimal_constant_step(double D, std::uint64_t N,
                             const NetworkShape& shape,
                             const LipschitzEstimate* lip = nullptr);

// (D_f / D + D L^2 L') (d_h d_v)^{3/4} / sqrt(N), the guarantee attached to
// the optimal constant step.
double convergence_bound(double D, double D_f, const LipschitzEstimate& lip,
                         std::uint64_t N, const NetworkShape& shape);

struct ScheduleDiagnostics {
  bool nonincreasing = false;
  bool monotone_threshold = false;  // gamma_1 < 1 / (L' sqrt(d_h d_v))
  bool weights_positive = false;    // 2 gamma_k - L' sqrt(d_h d_v) gamma_k^2 > 0
  std::uint64_t first_nonpositive_weight = 0;  // 1-based, 0 when none
  bool step_sum_divergent = false;     // sum gamma_k -> infinity
  bool square_sum_convergent = false;  // sum gamma_k^2 < infinity
  bool all_pass() const {
    return nonincreasing && monotone_threshold && weights_positive &&
           step_sum_divergent && square_sum_convergent;
  }
};

// Diagnostics only; never throws for a failing schedule.
ScheduleDiagnostics validate_schedule(const StepSchedule& schedule,
                                      std::uint64_t N,
                                      const LipschitzEstimate& lip,
                                      const NetworkShape& shape);

// Randomized-stopping law over iterations 1..N, with
// P(k) proportional to 2 gamma_k - L' sqrt(d_h d_v) gamma_k^2. A constant
// schedule cancels to the exactly uniform distribution.
struct StoppingDistribution {
  std::vector<double> probabilities;  // index 0 is iteration 1
  std::uint64_t size() const { return probabilities.size(); }
};

StoppingDistribution make_stopping_distribution(const StepSchedule& schedule,
                                                std::uint64_t N,
                                                const LipschitzEstimate& lip,
                                                const NetworkShape& shape);

// Draws a 1-based iteration index from the stopping law.
std::uint64_t sample_stopping_iteration(const StoppingDistribution& dist,
                                        Rng& rng);

// [D_f + (d_h d_v)^{3/2} L^2 L' sum gamma_k^2] / [sum (2 gamma_k - L'
// sqrt(d_h d_v) gamma_k^2)], the guarantee on the expected squared gradient
// norm at the randomized stopping point.
double expected_gradient_bound(const StepSchedule& schedule, std::uint64_t N,
                               const LipschitzEstimate& lip, double D_f,
                               const NetworkShape& shape);

// Incremental evaluation of expected_gradient_bound over growing N.
class GradientBoundAccumulator {
 public:
  GradientBoundAccumulator(const StepSchedule& schedule,
                           const LipschitzEstimate& lip, double D_f,
                           const NetworkShape& shape);
  // N must not decrease across calls.
  double extend_to(std::uint64_t N);

 private:
  StepSchedule schedule_;
  double lambda_;  // L' sqrt(d_h d_v)
  double coef_;    // (d_h d_v)^{3/2} L^2 L'
  double d_f_;
  std::uint64_t upto_ = 0;
  double sum_sq_ = 0.0;
  double sum_weight_ = 0.0;
};

// Fold count, instance count, and oracle-call count sufficient for a
// min-over-C-runs solution at tolerance epsilon and confidence 1 - delta,
// with r > 1 trading folds against samples and t the average number of times
// each instance is consumed.
struct SampleSizeReport {
  double r = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
  double t = 0.0;
  std::uint64_t C = 0;        // independent runs
  std::uint64_t S = 0;        // data instances
  std::uint64_t N_calls = 0;  // oracle calls per run
  std::uint64_t S_min = 0;    // instance floor as r -> 1
};

SampleSizeReport sample_size(double r, double delta, double epsilon, double t,
                             const NetworkShape& shape);

}  // namespace rsgda
