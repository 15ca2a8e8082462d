#include "rsg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace rsgda {

// Stream layout shared with the distributed runner, all split from Rng(seed):
//   0 -> data draws, nested per (meta, block); the plain run is (0, 0)
//   1 -> weight initialization
//   2 -> stopping-iteration draw
//   3 -> objective checkpoints
//   4 -> gradient probes, nested per iteration
//   5 -> subset planning, nested per meta-iteration
//   6 -> warm-start data draws
namespace stream {
constexpr std::uint64_t data = 0;
constexpr std::uint64_t init = 1;
constexpr std::uint64_t stopping = 2;
constexpr std::uint64_t objective = 3;
constexpr std::uint64_t probe = 4;
constexpr std::uint64_t plan = 5;
constexpr std::uint64_t warm = 6;
}  // namespace stream

namespace {

// Only the (i, j) entry of the gradient; shares the full forward pass.
double grad_entry(const Weights& w, const SamplePair& pair, GradFactors& f,
                  int i, int j) {
  grad_factors(w, pair, f);
  return f.h[i] * f.s[j] + f.d[i] * pair.x_tilde[j];
}

}  // namespace

LipschitzEstimate estimate_lipschitz(const Dataset& ds,
                                     const CorruptionModel& model,
                                     const NetworkShape& shape,
                                     std::uint64_t probes, Rng rng,
                                     const LipschitzOptions& opts) {
  shape.validate();
  model.validate();
  ds.validate();
  if (ds.dim() != shape.d_v)
    fail(ErrorCategory::dimension, "dataset dimension does not match d_v");
  if (probes < 2) fail(ErrorCategory::domain, "need at least 2 probes");

  const std::uint64_t n = ds.size();
  const std::uint64_t mean_count = std::min<std::uint64_t>(
      std::max<std::uint64_t>(1, opts.grad_instances), n);

  Weights w;
  w.shape = shape;
  w.m.resize(shape.d_h, shape.d_v);
  Weights w2 = w;
  SamplePair pair;
  GradFactors f;

  double l_max = 0.0;
  double lp_max = 0.0;
  for (std::uint64_t probe = 0; probe < probes; ++probe) {
    Rng pr = rng.split(probe);
    for (int i = 0; i < shape.d_h; ++i)
      for (int j = 0; j < shape.d_v; ++j) w.m(i, j) = pr.uniform(-3.0, 3.0);
    const int pi = static_cast<int>(pr.below(static_cast<std::uint64_t>(shape.d_h)));
    const int pj = static_cast<int>(pr.below(static_cast<std::uint64_t>(shape.d_v)));

    // Alternate wide secants with short ones; short secants track the local
    // slope, wide ones cover the probe box.
    double v2;
    if (probe % 2 == 0) {
      do {
        v2 = pr.uniform(-3.0, 3.0);
      } while (v2 == w.m(pi, pj));
    } else {
      const double delta = 1e-4 * (pr.unit() + 0.5);
      v2 = w.m(pi, pj) + (pr.unit() < 0.5 ? delta : -delta);
    }
    w2.m = w.m;
    w2.m(pi, pj) = v2;
    const double dw = std::abs(w.m(pi, pj) - v2);

    corrupt_into(pair, ds.instance(pr.below(n)), model, shape, pr);
    l_max = std::max(l_max, std::abs(loss(w, pair) - loss(w2, pair)) / dw);

    // Dataset-mean gradient entry, common masks across the two weight points.
    double g1 = 0.0;
    double g2 = 0.0;
    Rng mean_rng = pr.split(1);
    for (std::uint64_t s = 0; s < mean_count; ++s) {
      corrupt_into(pair, ds.instance(mean_rng.below(n)), model, shape,
                   mean_rng);
      g1 += grad_entry(w, pair, f, pi, pj);
      g2 += grad_entry(w2, pair, f, pi, pj);
    }
    g1 /= static_cast<double>(mean_count);
    g2 /= static_cast<double>(mean_count);
    lp_max = std::max(lp_max, std::abs(g1 - g2) / dw);
  }

  LipschitzEstimate est;
  est.L = std::max(l_max, std::numeric_limits<double>::min());
  est.L_prime = std::max(lp_max, std::numeric_limits<double>::min());
  est.probes = probes;
  return est;
}

StoppingRule StoppingRule::sampled(StoppingDistribution dist) {
  StoppingRule r;
  r.kind = Kind::sampled;
  r.distribution = std::move(dist);
  return r;
}

StoppingRule StoppingRule::min_grad_tail(std::uint64_t n1) {
  if (n1 < 1) fail(ErrorCategory::domain, "tail window must be >= 1");
  StoppingRule r;
  r.kind = Kind::min_grad_tail;
  r.tail = n1;
  return r;
}

StoppingRule StoppingRule::last() { return StoppingRule{}; }

RSGRun rsg_run(const Dataset& ds, const CorruptionModel& model,
               const NetworkShape& shape, const StepSchedule& schedule,
               std::uint64_t N, const StoppingRule& stopping,
               std::uint64_t seed, const RsgOptions& opts) {
  shape.validate();
  model.validate();
  ds.validate();
  if (ds.dim() != shape.d_v)
    fail(ErrorCategory::dimension, "dataset dimension does not match d_v");
  if (ds.has_bias != shape.bias)
    fail(ErrorCategory::dimension, "dataset bias column does not match shape");
  if (N < 1) fail(ErrorCategory::domain, "need at least one iteration");
  if (!(schedule.at(1) > 0.0) || !(schedule.at(N) > 0.0))
    fail(ErrorCategory::schedule_validity, "step sizes must be positive");
  if (stopping.kind == StoppingRule::Kind::sampled &&
      stopping.distribution.size() != N)
    fail(ErrorCategory::schedule_validity,
         "stopping distribution length does not match N");

  Rng root(seed);
  Rng data = root.split(stream::data).split(0).split(0);
  Rng init = root.split(stream::init);
  Rng stop = root.split(stream::stopping);
  Rng feval = root.split(stream::objective);
  Rng probe_root = root.split(stream::probe);

  RSGRun run;
  run.seed = seed;
  run.iterations = N;
  run.avg_instance_uses =
      static_cast<double>(N) / static_cast<double>(ds.size());

  Weights w = opts.init != nullptr ? *opts.init
                                   : Weights::random_init(shape, init);
  if (opts.init != nullptr && (w.m.rows() != shape.d_h || w.m.cols() != shape.d_v))
    fail(ErrorCategory::dimension, "initial weights do not match the shape");

  std::uint64_t r_pre = 0;
  if (stopping.kind == StoppingRule::Kind::sampled)
    r_pre = sample_stopping_iteration(stopping.distribution, stop);

  const bool track_f = opts.f_eval.draws > 0 ||
                       opts.f_eval.mode == ObjectivePolicy::Mode::exact;
  const std::uint64_t stride =
      opts.f_eval_stride > 0 ? opts.f_eval_stride
                             : std::max<std::uint64_t>(1, N / 16);
  if (track_f) {
    run.f_initial = objective_estimate(w, ds, model, opts.f_eval, feval.split(0));
    run.f_best = run.f_initial;
    run.f_tracked = true;
  }

  run.grad_norm_history.reserve(N);
  std::size_t probe_cursor = 0;
  double tail_best = std::numeric_limits<double>::infinity();
  const std::uint64_t tail_from =
      stopping.kind == StoppingRule::Kind::min_grad_tail
          ? (N > stopping.tail ? N - stopping.tail + 1 : 1)
          : N + 1;

  SamplePair pair;
  GradFactors f;
  for (std::uint64_t k = 1; k <= N; ++k) {
    while (probe_cursor < opts.probe.iterations.size() &&
           opts.probe.iterations[probe_cursor] == k) {
      Rng pr = probe_root.split(k);
      run.probe_history.emplace_back(k, opts.probe.estimator(w, k, pr));
      ++probe_cursor;
    }

    if (stopping.kind == StoppingRule::Kind::sampled && k == r_pre) {
      run.w_final = w;
      run.stop_iteration = k;
    }

    const std::uint64_t i = data.below(ds.size());
    corrupt_into(pair, ds.instance(i), model, shape, data);
    grad_factors(w, pair, f);
    const double gn = f.norm_squared(pair);
    run.grad_norm_history.push_back(gn);

    if (k >= tail_from && gn < tail_best) {
      tail_best = gn;
      run.w_final = w;
      run.stop_iteration = k;
    }
    if (stopping.kind == StoppingRule::Kind::last && k == N) {
      run.w_final = w;
      run.stop_iteration = N;
    }

    const double g = schedule.at(k);
    w.m.noalias() -= (g * f.h) * f.s.transpose();
    w.m.noalias() -= (g * f.d) * pair.x_tilde.transpose();

    if (track_f && k % stride == 0)
      run.f_best = std::min(
          run.f_best,
          objective_estimate(w, ds, model, opts.f_eval, feval.split(k)));
  }

  run.w_end = w;
  if (track_f)
    run.f_best = std::min(run.f_best, objective_estimate(w, ds, model,
                                                         opts.f_eval,
                                                         feval.split(N + 1)));
  return run;
}

FoldSelection multi_fold_select(const std::vector<RSGRun>& runs,
                                const Dataset& ds,
                                const CorruptionModel& model,
                                const GradNormPolicy& policy,
                                std::uint64_t score_seed) {
  if (runs.empty()) fail(ErrorCategory::domain, "no runs to select from");
  const NetworkShape& shape = runs.front().w_final.shape;
  for (const auto& r : runs)
    if (r.w_final.shape.d_v != shape.d_v || r.w_final.shape.d_h != shape.d_h ||
        r.w_final.shape.bias != shape.bias)
      fail(ErrorCategory::dimension, "runs disagree on the network shape");

  Rng rng(score_seed);
  FoldSelection sel;
  sel.scores.reserve(runs.size());
  for (std::size_t c = 0; c < runs.size(); ++c) {
    const double score = grad_norm_estimate(runs[c].w_final, ds, model, policy,
                                            rng.split(c));
    sel.scores.push_back(score);
    if (c == 0 || score < sel.score) {
      sel.score = score;
      sel.index = c;
    }
  }
  return sel;
}

}  // namespace rsgda
