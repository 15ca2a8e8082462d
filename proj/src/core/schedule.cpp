#include "schedule.hpp"

#include <cmath>
#include <string>

namespace rsgda {

double gradient_lipschitz(const LipschitzEstimate& lip,
                          const NetworkShape& shape) {
  return lip.L_prime * std::sqrt(static_cast<double>(shape.parameters()));
}

double StepSchedule::at(std::uint64_t k) const {
  switch (kind) {
    case Kind::constant:
    case Kind::constant_optimal:
      return gamma;
    case Kind::polynomial:
      return gamma1 / std::pow(static_cast<double>(k), p);
  }
  return 0.0;
}

const char* StepSchedule::kind_name() const {
  switch (kind) {
    case Kind::constant: return "constant";
    case Kind::constant_optimal: return "constant_optimal";
    case Kind::polynomial: return "polynomial";
  }
  return "?";
}

StepSchedule StepSchedule::constant(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    fail(ErrorCategory::domain, "constant step size must be positive");
  StepSchedule s;
  s.kind = Kind::constant;
  s.gamma = gamma;
  return s;
}

StepSchedule StepSchedule::constant_optimal(double D, std::uint64_t N,
                                            const NetworkShape& shape,
                                            const LipschitzEstimate* lip) {
  StepSchedule s;
  s.kind = Kind::constant_optimal;
  s.D = D;
  s.n_ref = N;
  s.gamma = optimal_constant_step(D, N, shape, lip);
  return s;
}

StepSchedule StepSchedule::polynomial(double gamma1, double p) {
  if (!(gamma1 > 0.0) || !std::isfinite(gamma1))
    fail(ErrorCategory::domain, "polynomial step size gamma1 must be positive");
  if (!std::isfinite(p))
    fail(ErrorCategory::domain, "polynomial exponent must be finite");
  StepSchedule s;
  s.kind = Kind::polynomial;
  s.gamma1 = gamma1;
  s.p = p;
  return s;
}

double optimal_constant_step(double D, std::uint64_t N,
                             const NetworkShape& shape,
                             const LipschitzEstimate* lip) {
  shape.validate();
  if (N < 1) fail(ErrorCategory::domain, "iteration count must be >= 1");
  if (!(D > 0.0) || !std::isfinite(D))
    fail(ErrorCategory::domain, "D must be positive");
  const double dims = static_cast<double>(shape.parameters());
  if (lip != nullptr) {
    const double d_max =
        std::sqrt(static_cast<double>(N)) * std::pow(dims, 0.25) / lip->L_prime;
    if (D > d_max)
      fail(ErrorCategory::domain,
           "D = " + std::to_string(D) + " exceeds sqrt(N) (d_h d_v)^{1/4} / L' = " +
               std::to_string(d_max));
  }
  return D / (std::sqrt(static_cast<double>(N)) * std::pow(dims, 0.75));
}

double convergence_bound(double D, double D_f, const LipschitzEstimate& lip,
                         std::uint64_t N, const NetworkShape& shape) {
  if (D_f < 0.0) fail(ErrorCategory::domain, "D_f must be nonnegative");
  optimal_constant_step(D, N, shape, &lip);  // domain checks
  const double dims = static_cast<double>(shape.parameters());
  const double d_bar = D_f / D + D * lip.L * lip.L * lip.L_prime;
  return d_bar * std::pow(dims, 0.75) / std::sqrt(static_cast<double>(N));
}

ScheduleDiagnostics validate_schedule(const StepSchedule& schedule,
                                      std::uint64_t N,
                                      const LipschitzEstimate& lip,
                                      const NetworkShape& shape) {
  ScheduleDiagnostics d;
  const double lambda = gradient_lipschitz(lip, shape);

  d.nonincreasing = true;
  double prev = schedule.at(1);
  for (std::uint64_t k = 2; k <= N; ++k) {
    const double cur = schedule.at(k);
    if (cur > prev) {
      d.nonincreasing = false;
      break;
    }
    prev = cur;
  }

  d.monotone_threshold = schedule.at(1) < 1.0 / lambda;

  d.weights_positive = true;
  for (std::uint64_t k = 1; k <= N; ++k) {
    const double g = schedule.at(k);
    if (!(2.0 * g - lambda * g * g > 0.0)) {
      d.weights_positive = false;
      d.first_nonpositive_weight = k;
      break;
    }
  }

  switch (schedule.kind) {
    case StepSchedule::Kind::constant:
    case StepSchedule::Kind::constant_optimal:
      d.step_sum_divergent = true;
      d.square_sum_convergent = false;
      break;
    case StepSchedule::Kind::polynomial:
      d.step_sum_divergent = schedule.p <= 1.0;
      d.square_sum_convergent = schedule.p > 0.5;
      break;
  }
  return d;
}

StoppingDistribution make_stopping_distribution(const StepSchedule& schedule,
                                                std::uint64_t N,
                                                const LipschitzEstimate& lip,
                                                const NetworkShape& shape) {
  if (N < 1) fail(ErrorCategory::domain, "stopping law needs N >= 1");
  const double lambda = gradient_lipschitz(lip, shape);
  StoppingDistribution dist;
  dist.probabilities.resize(N);
  double total = 0.0;
  bool all_equal = true;
  for (std::uint64_t k = 1; k <= N; ++k) {
    const double g = schedule.at(k);
    const double w = 2.0 * g - lambda * g * g;
    if (!(w > 0.0))
      fail(ErrorCategory::schedule_validity,
           "stopping weight non-positive at iteration " + std::to_string(k) +
               " (gamma = " + std::to_string(g) + ", need gamma < 2 / (L' sqrt(d_h d_v)) = " +
               std::to_string(2.0 / lambda) + ")");
    dist.probabilities[k - 1] = w;
    total += w;
    if (w != dist.probabilities[0]) all_equal = false;
  }
  if (all_equal) {
    // Equal weights cancel exactly; avoid normalization rounding.
    const double u = 1.0 / static_cast<double>(N);
    for (auto& p : dist.probabilities) p = u;
  } else {
    for (auto& p : dist.probabilities) p /= total;
  }
  return dist;
}

std::uint64_t sample_stopping_iteration(const StoppingDistribution& dist,
                                        Rng& rng) {
  if (dist.probabilities.empty())
    fail(ErrorCategory::domain, "empty stopping distribution");
  const double u = rng.unit();
  double acc = 0.0;
  for (std::uint64_t k = 0; k < dist.size(); ++k) {
    acc += dist.probabilities[k];
    if (u < acc) return k + 1;
  }
  return dist.size();
}

GradientBoundAccumulator::GradientBoundAccumulator(
    const StepSchedule& schedule, const LipschitzEstimate& lip, double D_f,
    const NetworkShape& shape)
    : schedule_(schedule), d_f_(D_f) {
  shape.validate();
  if (D_f < 0.0) fail(ErrorCategory::domain, "D_f must be nonnegative");
  const double dims = static_cast<double>(shape.parameters());
  lambda_ = gradient_lipschitz(lip, shape);
  coef_ = std::pow(dims, 1.5) * lip.L * lip.L * lip.L_prime;
}

double GradientBoundAccumulator::extend_to(std::uint64_t N) {
  if (N < upto_)
    fail(ErrorCategory::domain, "accumulator cannot shrink its horizon");
  for (std::uint64_t k = upto_ + 1; k <= N; ++k) {
    const double g = schedule_.at(k);
    sum_sq_ += g * g;
    sum_weight_ += 2.0 * g - lambda_ * g * g;
  }
  upto_ = N;
  if (!(sum_weight_ > 0.0))
    fail(ErrorCategory::schedule_validity,
         "expected-gradient bound undefined: nonpositive weight sum at N = " +
             std::to_string(N));
  return (d_f_ + coef_ * sum_sq_) / sum_weight_;
}

double expected_gradient_bound(const StepSchedule& schedule, std::uint64_t N,
                               const LipschitzEstimate& lip, double D_f,
                               const NetworkShape& shape) {
  if (N < 1) fail(ErrorCategory::domain, "bound needs N >= 1");
  GradientBoundAccumulator acc(schedule, lip, D_f, shape);
  return acc.extend_to(N);
}

namespace {

std::uint64_t ceil_to_u64(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0 || v > 9.0e18)
    fail(ErrorCategory::domain, std::string(what) + " out of range");
  return static_cast<std::uint64_t>(std::ceil(v));
}

}  // namespace

SampleSizeReport sample_size(double r, double delta, double epsilon, double t,
                             const NetworkShape& shape) {
  shape.validate();
  if (!(r > 1.0))
    fail(ErrorCategory::domain,
         "r must exceed 1 (the min-over-runs argument needs r > 1)");
  if (!(delta > 0.0 && delta < 1.0))
    fail(ErrorCategory::domain, "delta must lie in (0, 1)");
  if (!(epsilon > 0.0)) fail(ErrorCategory::domain, "epsilon must be positive");
  if (!(t >= 1.0)) fail(ErrorCategory::domain, "t must be >= 1");

  const double dims = static_cast<double>(shape.parameters());
  const double base = std::pow(dims, 1.5) / (epsilon * epsilon);
  SampleSizeReport rep;
  rep.r = r;
  rep.delta = delta;
  rep.epsilon = epsilon;
  rep.t = t;
  rep.C = std::max<std::uint64_t>(
      1, ceil_to_u64(std::log(1.0 / delta) / std::log(std::sqrt(r)), "C"));
  rep.S = ceil_to_u64(r * base / t, "S");
  rep.N_calls = ceil_to_u64(r * base, "N_calls");
  rep.S_min = ceil_to_u64(base / t, "S_min");
  return rep;
}

}  // namespace rsgda
