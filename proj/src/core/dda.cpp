#include "dda.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

namespace rsgda {

namespace {

// Mirrors the stream layout in rsg.cpp.
namespace stream {
constexpr std::uint64_t data = 0;
constexpr std::uint64_t init = 1;
constexpr std::uint64_t plan = 5;
constexpr std::uint64_t warm = 6;
}  // namespace stream

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

double subda_corruption(double zeta, double tau) {
  if (!(zeta >= 0.0 && zeta <= 1.0))
    fail(ErrorCategory::domain, "zeta must lie in [0, 1]");
  if (!(tau > 1.0 - zeta))
    fail(ErrorCategory::infeasible,
         "tau = " + std::to_string(tau) + " violates 1 - zeta < tau (1 - zeta = " +
             std::to_string(1.0 - zeta) + ")");
  if (!(tau < 1.0))
    fail(ErrorCategory::infeasible,
         "tau = " + std::to_string(tau) + " violates tau < 1");
  return 1.0 - (1.0 - zeta) / tau;
}

std::uint64_t min_subda_count(double tau, double phi) {
  if (!(tau > 0.0 && tau < 1.0))
    fail(ErrorCategory::domain, "tau must lie in (0, 1)");
  if (!(phi > 0.0 && phi < 1.0))
    fail(ErrorCategory::domain, "phi must lie in (0, 1)");
  const double b = std::ceil(std::log(phi) / std::log(1.0 - tau));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(b));
}

namespace {

std::vector<std::vector<int>> draw_subsets(const NetworkShape& shape,
                                           double tau, std::uint64_t B,
                                           PlanMode mode, Rng rng) {
  const int n_units = shape.corruptible();
  const int block =
      std::min(n_units, static_cast<int>(std::ceil(tau * n_units)));
  std::vector<int> units(static_cast<std::size_t>(n_units));
  std::iota(units.begin(), units.end(), 0);

  std::vector<std::vector<int>> subsets;
  if (mode == PlanMode::disjoint_partition) {
    for (int i = n_units - 1; i > 0; --i)
      std::swap(units[static_cast<std::size_t>(i)],
                units[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    for (int at = 0; at < n_units; at += block) {
      const int end = std::min(at + block, n_units);
      std::vector<int> s(units.begin() + at, units.begin() + end);
      std::sort(s.begin(), s.end());
      subsets.push_back(std::move(s));
    }
  } else {
    for (std::uint64_t b = 0; b < B; ++b) {
      // Partial shuffle: the first `block` positions become the subset.
      std::vector<int> pool = units;
      for (int i = 0; i < block; ++i) {
        const std::uint64_t j =
            i + rng.below(static_cast<std::uint64_t>(n_units - i));
        std::swap(pool[static_cast<std::size_t>(i)],
                  pool[static_cast<std::size_t>(j)]);
      }
      std::vector<int> s(pool.begin(), pool.begin() + block);
      std::sort(s.begin(), s.end());
      subsets.push_back(std::move(s));
    }
  }
  return subsets;
}

}  // namespace

SubDAPlan plan_subdas(const NetworkShape& shape, double zeta, double tau,
                      double phi, PlanMode mode, std::uint64_t M,
                      std::uint64_t seed, const PlanOptions& opts) {
  shape.validate();
  if (!(zeta >= 0.0 && zeta <= 1.0))
    fail(ErrorCategory::domain, "zeta must lie in [0, 1]");
  if (!(phi > 0.0 && phi < 1.0))
    fail(ErrorCategory::domain, "phi must lie in (0, 1)");
  if (M < 1) fail(ErrorCategory::domain, "need at least one meta-iteration");
  if (!(tau > 0.0 && tau <= 1.0))
    fail(ErrorCategory::domain, "tau must lie in (0, 1]");

  SubDAPlan plan;
  plan.shape = shape;
  plan.zeta = zeta;
  plan.tau = tau;
  plan.phi = phi;
  plan.mode = mode;
  plan.M = M;
  plan.seed = seed;

  if (tau == 1.0) {
    plan.q = zeta;  // degenerate single-block plan
  } else if (opts.clamp_q) {
    plan.q = std::max(0.0, 1.0 - (1.0 - zeta) / tau);
  } else {
    plan.q = subda_corruption(zeta, tau);
  }

  if (mode == PlanMode::disjoint_partition) {
    plan.subsets = draw_subsets(shape, tau, 0, mode,
                                Rng(seed).split(stream::plan).split(0));
    plan.B = plan.subsets.size();
    if (opts.B_override != 0 && opts.B_override != plan.B)
      fail(ErrorCategory::plan,
           "disjoint partition of " + std::to_string(shape.corruptible()) +
               " units at tau = " + std::to_string(tau) + " yields B = " +
               std::to_string(plan.B) + ", not " +
               std::to_string(opts.B_override));
  } else {
    const std::uint64_t floor = min_subda_count(tau, phi);
    plan.B = std::max(floor, opts.B_override);
    if (opts.B_override != 0 && opts.B_override < floor)
      fail(ErrorCategory::plan,
           "B = " + std::to_string(opts.B_override) +
               " is below the coverage bound " + std::to_string(floor));
    plan.subsets = draw_subsets(shape, tau, plan.B, mode,
                                Rng(seed).split(stream::plan).split(0));
  }
  return plan;
}

std::vector<std::vector<int>> subsets_for_meta(const SubDAPlan& plan,
                                               std::uint64_t meta) {
  return draw_subsets(plan.shape, plan.tau, plan.B, plan.mode,
                      Rng(plan.seed).split(stream::plan).split(meta));
}

namespace {

NetworkShape sub_shape(const SubDAPlan& plan, std::size_t width) {
  NetworkShape s;
  s.d_v = static_cast<int>(width) + (plan.shape.bias ? 1 : 0);
  s.d_h = plan.shape.d_h;
  s.bias = plan.shape.bias;
  s.bias_in_loss = plan.shape.bias_in_loss;
  return s;
}

// Column indices a sub-network touches: its data units plus the bias column.
std::vector<int> block_columns(const SubDAPlan& plan,
                               const std::vector<int>& subset) {
  std::vector<int> cols = subset;
  if (plan.shape.bias) cols.push_back(plan.shape.d_v - 1);
  return cols;
}

// One restricted RSG chunk. Reads and writes only the given columns of its
// private block copy; the caller owns the commit.
void run_subchunk(Weights& wb, const Dataset& ds, const std::vector<int>& cols,
                  const CorruptionModel& model, const StepSchedule& schedule,
                  std::uint64_t n_steps, Rng data,
                  std::vector<double>& history) {
  const std::size_t width = cols.size();
  SamplePair pair;
  pair.x.resize(static_cast<Eigen::Index>(width));
  Vector gathered(static_cast<Eigen::Index>(width));
  GradFactors f;
  history.reserve(n_steps);
  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    const std::uint64_t i = data.below(ds.size());
    const auto row = ds.instance(i);
    for (std::size_t j = 0; j < width; ++j)
      gathered[static_cast<Eigen::Index>(j)] = row[cols[j]];
    corrupt_into(pair, gathered, model, wb.shape, data);
    grad_factors(wb, pair, f);
    history.push_back(f.norm_squared(pair));
    const double g = schedule.at(k);
    wb.m.noalias() -= (g * f.h) * f.s.transpose();
    wb.m.noalias() -= (g * f.d) * pair.x_tilde.transpose();
  }
}

}  // namespace

DdaResult run_distributed(const SubDAPlan& plan, const Dataset& ds,
                          const StepSchedule& schedule,
                          std::uint64_t n_per_subda, ExecutionMode exec,
                          std::uint64_t seed, const DdaOptions& opts) {
  plan.shape.validate();
  ds.validate();
  if (ds.dim() != plan.shape.d_v)
    fail(ErrorCategory::dimension, "dataset dimension does not match the plan");
  if (ds.has_bias != plan.shape.bias)
    fail(ErrorCategory::dimension, "dataset bias column does not match the plan");
  if (n_per_subda < 1)
    fail(ErrorCategory::domain, "need at least one update per sub-network");
  if (!(plan.q >= 0.0 && plan.q < 1.0) && !(plan.q == plan.zeta))
    fail(ErrorCategory::plan, "plan corruption q outside [0, 1)");
  if (exec == ExecutionMode::parallel &&
      plan.mode != PlanMode::disjoint_partition)
    fail(ErrorCategory::plan,
         "parallel execution requires disjoint_partition subsets");

  Rng root(seed);
  Rng init = root.split(stream::init);

  DdaResult result;
  result.plan = plan;
  result.w = Weights::random_init(plan.shape, init);

  if (opts.warm_start > 0) {
    const StepSchedule warm_schedule = StepSchedule::constant_optimal(
        opts.warm_D, opts.warm_start, plan.shape);
    const CorruptionModel warm_model{plan.zeta};
    std::vector<int> all_cols(static_cast<std::size_t>(plan.shape.d_v));
    std::iota(all_cols.begin(), all_cols.end(), 0);
    std::vector<double> warm_hist;
    run_subchunk(result.w, ds, all_cols, warm_model, warm_schedule,
                 opts.warm_start, root.split(stream::warm), warm_hist);
  }

  const CorruptionModel sub_model{plan.q};
  Rng data_root = root.split(stream::data);
  const double t0 = now_ms();

  for (std::uint64_t m = 0; m < plan.M; ++m) {
    const auto subsets = m == 0 ? plan.subsets : subsets_for_meta(plan, m);
    Rng meta_data = data_root.split(m);

    // Snapshot reads: every sub-network starts from the meta-iteration-start
    // parameters. Results are staged and committed at the barrier below.
    std::vector<Weights> staged(subsets.size());
    std::vector<std::vector<double>> histories(subsets.size());
    std::vector<std::vector<int>> columns(subsets.size());

    auto run_block = [&](std::size_t b) {
      columns[b] = block_columns(plan, subsets[b]);
      Weights wb;
      wb.shape = sub_shape(plan, subsets[b].size());
      wb.m.resize(wb.shape.d_h, wb.shape.d_v);
      for (std::size_t j = 0; j < columns[b].size(); ++j)
        wb.m.col(static_cast<Eigen::Index>(j)) = result.w.m.col(columns[b][j]);
      run_subchunk(wb, ds, columns[b], sub_model, schedule, n_per_subda,
                   meta_data.split(b), histories[b]);
      staged[b] = std::move(wb);
    };

    if (exec == ExecutionMode::sequential) {
      for (std::size_t b = 0; b < subsets.size(); ++b) run_block(b);
    } else {
      const std::size_t workers =
          opts.workers > 0
              ? std::min<std::size_t>(opts.workers, subsets.size())
              : subsets.size();
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t wi = 0; wi < workers; ++wi)
        pool.emplace_back([&, wi] {
          for (std::size_t b = wi; b < subsets.size(); b += workers)
            run_block(b);
        });
      for (auto& th : pool) th.join();
    }

    // Barrier commit in block order; disjoint data columns commute, the bias
    // column takes the last writer.
    for (std::size_t b = 0; b < subsets.size(); ++b) {
      for (std::size_t j = 0; j < columns[b].size(); ++j)
        result.w.m.col(columns[b][j]) =
            staged[b].m.col(static_cast<Eigen::Index>(j));
      result.traces.push_back(
          SubRunTrace{m, b, std::move(histories[b])});
    }
  }

  result.wall_ms = now_ms() - t0;
  return result;
}

DdaBounds dda_bounds(double D, double D_f, const LipschitzEstimate& lip,
                     std::uint64_t N, std::uint64_t B, double tau,
                     const NetworkShape& shape) {
  shape.validate();
  if (B < 1) fail(ErrorCategory::domain, "B must be >= 1");
  if (!(tau > 0.0 && tau <= 1.0))
    fail(ErrorCategory::domain, "tau must lie in (0, 1]");
  if (N < 1) fail(ErrorCategory::domain, "N must be >= 1");
  if (!(D > 0.0)) fail(ErrorCategory::domain, "D must be positive");
  if (D_f < 0.0) fail(ErrorCategory::domain, "D_f must be nonnegative");
  const double dims = tau * static_cast<double>(shape.parameters());
  const double d_max =
      std::sqrt(static_cast<double>(N)) * std::pow(dims, 0.25) / lip.L_prime;
  if (D > d_max)
    fail(ErrorCategory::domain,
         "D = " + std::to_string(D) +
             " exceeds sqrt(N) (tau d_h d_v)^{1/4} / L' = " +
             std::to_string(d_max));
  DdaBounds out;
  out.gamma_b = D / (std::sqrt(static_cast<double>(N)) * std::pow(dims, 0.75));
  const double d_bar =
      D_f / (static_cast<double>(B) * D) + D * lip.L * lip.L * lip.L_prime;
  out.bound = d_bar * std::pow(dims, 0.75) / std::sqrt(static_cast<double>(N));
  return out;
}

DdaSampleSize dda_sample_size(double r, double delta, double epsilon, double t,
                              double tau, const NetworkShape& shape) {
  if (!(tau > 0.0 && tau < 1.0))
    fail(ErrorCategory::domain, "tau must lie in (0, 1)");
  // Same fold/instance calculus on the tau-scaled parameter count.
  NetworkShape scaled = shape;
  const SampleSizeReport base = sample_size(r, delta, epsilon, t, scaled);
  const double dims = tau * static_cast<double>(shape.parameters());
  DdaSampleSize out;
  out.r = r;
  out.delta = delta;
  out.epsilon = epsilon;
  out.t = t;
  out.tau = tau;
  out.M = base.C;
  const double s = r * std::pow(dims, 1.5) / (t * epsilon * epsilon);
  out.S = static_cast<std::uint64_t>(std::ceil(s));
  return out;
}

std::vector<SpeedupPoint> measure_speedup(
    const Dataset& ds, int d_h, double zeta,
    const std::vector<std::uint64_t>& b_sweep, std::uint64_t n_per_subda,
    std::uint64_t seed, const SpeedupOptions& opts) {
  ds.validate();
  if (b_sweep.empty()) fail(ErrorCategory::domain, "empty B sweep");
  const NetworkShape shape = ds.shape_for(d_h);
  const CorruptionModel model{zeta};

  // Baseline: the plain single-network run, objective tracking off.
  double base_ms = 0.0;
  {
    RsgOptions ro;
    ro.f_eval.draws = 0;
    ro.f_eval.mode = ObjectivePolicy::Mode::monte_carlo;
    const StepSchedule sched =
        StepSchedule::constant_optimal(opts.D, n_per_subda, shape);
    const double t0 = now_ms();
    rsg_run(ds, model, shape, sched, n_per_subda, StoppingRule::last(), seed,
            ro);
    base_ms = now_ms() - t0;
  }

  std::vector<SpeedupPoint> points;
  for (const std::uint64_t b : b_sweep) {
    SpeedupPoint pt;
    pt.B = b;
    if (b <= 1) {
      pt.wall_ms = base_ms;
      pt.ratio = 1.0;
      points.push_back(pt);
      continue;
    }
    const double tau = 1.0 / static_cast<double>(b);
    PlanOptions po;
    po.clamp_q = opts.clamp_q;
    const SubDAPlan plan =
        plan_subdas(shape, zeta, tau, 0.01, PlanMode::disjoint_partition,
                    opts.meta_iterations, seed, po);
    const NetworkShape block_shape =
        ds.shape_for(d_h);  // schedule sized for one block
    NetworkShape s = block_shape;
    s.d_v = static_cast<int>(plan.subsets.front().size()) +
            (shape.bias ? 1 : 0);
    const StepSchedule sched =
        StepSchedule::constant_optimal(opts.D, n_per_subda, s);
    DdaOptions dopts;
    dopts.warm_start = 0;
    dopts.workers = static_cast<int>(plan.B);
    const DdaResult res = run_distributed(plan, ds, sched, n_per_subda,
                                          ExecutionMode::parallel, seed, dopts);
    pt.wall_ms = res.wall_ms;
    pt.ratio = base_ms / res.wall_ms;
    points.push_back(pt);
  }
  return points;
}

}  // namespace rsgda
