#include "selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dda.hpp"
#include "experiment.hpp"
#include "oracle.hpp"
#include "rsg.hpp"

namespace rsgda {

namespace {

// Mixed absolute/relative deviation against a reference gradient: exact for
// large entries, absolute at unit scale for near-zero ones.
double grad_deviation(const Matrix& got, const Matrix& want) {
  const double scale = std::max(1.0, want.cwiseAbs().maxCoeff());
  return (got - want).cwiseAbs().maxCoeff() / scale;
}

Matrix central_differences(const Weights& w, const SamplePair& pair,
                           double h) {
  Matrix out(w.shape.d_h, w.shape.d_v);
  Weights probe = w;
  for (int i = 0; i < w.shape.d_h; ++i) {
    for (int j = 0; j < w.shape.d_v; ++j) {
      const double keep = probe.m(i, j);
      probe.m(i, j) = keep + h;
      const double up = loss(probe, pair);
      probe.m(i, j) = keep - h;
      const double down = loss(probe, pair);
      probe.m(i, j) = keep;
      out(i, j) = (up - down) / (2.0 * h);
    }
  }
  return out;
}

bool check_gradient_fd() {
  Rng rng(0xC0FFEE);
  const double zetas[] = {0.0, 0.3, 0.7};
  for (int t = 0; t < 20; ++t) {
    Rng tr = rng.split(t);
    NetworkShape shape;
    shape.d_v = 2 + static_cast<int>(tr.below(7));
    shape.d_h = 1 + static_cast<int>(tr.below(8));
    shape.bias = tr.unit() < 0.5;
    if (shape.bias) shape.d_v += 1;
    const CorruptionModel model{zetas[t % 3]};
    Weights w = Weights::random_init(shape, tr);
    w.m *= 4.0;
    Vector x(shape.d_v);
    for (int j = 0; j < shape.d_v; ++j) x[j] = tr.unit();
    if (shape.bias) x[shape.d_v - 1] = 1.0;
    const SamplePair pair = corrupt(x, model, shape, tr);
    if (grad_deviation(grad(w, pair), central_differences(w, pair, 1e-5)) >
        1e-6)
      return false;
  }
  return true;
}

bool nearly(double got, double want, double tol) {
  return std::abs(got - want) <= tol;
}

bool check_golden_values() {
  const NetworkShape s44{4, 4, false};
  const LipschitzEstimate unit{1.0, 1.0, 1};
  if (!nearly(optimal_constant_step(1.0, 100, s44), 0.0125, 1e-15))
    return false;
  if (!nearly(convergence_bound(1.0, 1.0, unit, 100, s44), 1.6, 1e-12))
    return false;

  const NetworkShape s11{1, 1, false};
  const auto dist =
      make_stopping_distribution(StepSchedule::polynomial(0.5, 1.0), 2, unit,
                                 s11);
  if (!nearly(dist.probabilities[0], 0.63158, 1e-5)) return false;
  if (!nearly(dist.probabilities[1], 0.36842, 1e-5)) return false;

  const NetworkShape paper_shape{100, 20, false};
  const auto rep = sample_size(4.0, 0.05, 0.05, 1000.0, paper_shape);
  if (rep.C != 5 || rep.S_min != 35778) return false;
  const auto rep2 = sample_size(8.39, 0.05, 0.05, 1000.0, paper_shape);
  if (std::abs(static_cast<double>(rep2.S) - 3.0e5) > 0.02 * 3.0e5)
    return false;

  const NetworkShape s416{4, 4, false};
  const auto db = dda_bounds(1.0, 1.0, unit, 100, 4, 0.5, s416);
  if (!nearly(db.bound, 0.59460, 1e-5)) return false;
  const auto dss = dda_sample_size(4.0, 0.05, 0.05, 1000.0, 0.5,
                                   NetworkShape{100, 20, false});
  if (dss.M != 5 || dss.S != 50597) return false;

  if (!nearly(subda_corruption(0.5, 0.75), 1.0 / 3.0, 1e-15)) return false;
  if (min_subda_count(0.5, 0.01) != 7) return false;
  return true;
}

bool check_stopping_uniform() {
  const NetworkShape shape{3, 2, false};
  const LipschitzEstimate lip{1.0, 1.0, 1};
  const auto dist = make_stopping_distribution(
      StepSchedule::constant(0.1), 7, lip, shape);
  for (const double p : dist.probabilities)
    if (p != 1.0 / 7.0) return false;
  Rng a(42), b(42);
  return sample_stopping_iteration(dist, a) ==
         sample_stopping_iteration(dist, b);
}

bool check_mc_against_bruteforce() {
  Rng rng(7);
  const NetworkShape shape{6, 3, false};
  const CorruptionModel model{0.4};
  Weights w = Weights::random_init(shape, rng);
  w.m *= 3.0;
  Dataset ds = gen_synthetic(5, 6, 0.2, 11);

  const Matrix exact = dataset_expected_grad(w, ds, model);
  const Matrix mc = mc_grad_estimate(w, ds, model, 20000, Rng(13));
  // 4 sigma of a bounded-variance mean at 2e4 draws, generous scale.
  return (mc - exact).cwiseAbs().maxCoeff() < 0.05;
}

bool check_q_roundtrip() {
  for (int zi = 1; zi < 20; ++zi) {
    const double zeta = zi / 20.0;
    for (int ti = 1; ti < 20; ++ti) {
      const double tau = ti / 20.0;
      if (!(tau > 1.0 - zeta) || !(tau < 1.0)) continue;
      const double q = subda_corruption(zeta, tau);
      if (std::abs((1.0 - tau) + tau * q - zeta) > 1e-15) return false;
    }
  }
  return true;
}

bool check_idx_roundtrip() {
  namespace fs = std::filesystem;
  const Dataset ds = gen_synthetic(13, 6, 0.0, 3);
  const auto path = fs::temp_directory_path() / "rsgda_selfcheck.idx";
  write_idx(ds, path.string(), 2, 3);
  const Dataset back = load_idx(path.string());
  fs::remove(path);
  if (back.size() != ds.size() || back.dim() != ds.dim()) return false;
  return (back.x - ds.x).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-12;
}

bool check_run_determinism() {
  const Dataset ds = gen_synthetic(32, 6, 0.2, 5).with_bias();
  const NetworkShape shape = ds.shape_for(3);
  const CorruptionModel model{0.3};
  const StepSchedule sched = StepSchedule::constant_optimal(1.0, 300, shape);
  const RSGRun a =
      rsg_run(ds, model, shape, sched, 300, StoppingRule::last(), 99);
  const RSGRun b =
      rsg_run(ds, model, shape, sched, 300, StoppingRule::last(), 99);
  return a.w_final.m == b.w_final.m &&
         a.grad_norm_history == b.grad_norm_history;
}

bool check_degenerate_plan() {
  const Dataset ds = gen_synthetic(24, 5, 0.1, 17);
  const NetworkShape shape = ds.shape_for(3);
  const double zeta = 0.25;
  const SubDAPlan plan = plan_subdas(shape, zeta, 1.0, 0.01,
                                     PlanMode::disjoint_partition, 1, 77);
  const StepSchedule sched = StepSchedule::constant_optimal(1.0, 200, shape);
  DdaOptions opts;
  opts.warm_start = 0;
  const DdaResult dist = run_distributed(plan, ds, sched, 200,
                                         ExecutionMode::sequential, 77, opts);
  RsgOptions ro;
  ro.f_eval.draws = 0;
  const RSGRun plain = rsg_run(ds, CorruptionModel{zeta}, shape, sched, 200,
                               StoppingRule::last(), 77, ro);
  return dist.w.m == plain.w_end.m;
}

}  // namespace

int run_self_checks(std::ostream& out, bool verbose) {
  struct Check {
    const char* name;
    std::function<bool()> fn;
  };
  const std::vector<Check> checks = {
      {"gradient_vs_finite_differences", check_gradient_fd},
      {"closed_form_golden_values", check_golden_values},
      {"stopping_law_uniformity", check_stopping_uniform},
      {"monte_carlo_vs_bruteforce", check_mc_against_bruteforce},
      {"subda_corruption_roundtrip", check_q_roundtrip},
      {"idx_roundtrip", check_idx_roundtrip},
      {"run_determinism", check_run_determinism},
      {"degenerate_plan_equivalence", check_degenerate_plan},
  };

  int failures = 0;
  for (const auto& c : checks) {
    bool ok = false;
    std::string detail;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      detail = e.what();
    }
    if (!ok) ++failures;
    out << "check " << c.name << ": " << (ok ? "PASS" : "FAIL");
    if (!ok && verbose && !detail.empty()) out << " (" << detail << ")";
    out << '\n';
  }
  return failures;
}

}  // namespace rsgda
