#include "rsgda/rsgda.h"

#include <cstring>
#include <iostream>
#include <string>

#include "core/dda.hpp"
#include "core/experiment.hpp"
#include "core/oracle.hpp"
#include "core/rsg.hpp"
#include "core/selfcheck.hpp"

using namespace rsgda;

struct rsgda_dataset {
  Dataset ds;
};
struct rsgda_run {
  RSGRun run;
};
struct rsgda_dda_run {
  DdaResult res;
};

namespace {

thread_local std::string g_last_error;

rsgda_status map_category(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::domain: return RSGDA_ERR_DOMAIN;
    case ErrorCategory::dimension: return RSGDA_ERR_DIMENSION;
    case ErrorCategory::enumeration_limit: return RSGDA_ERR_ENUM_LIMIT;
    case ErrorCategory::schedule_validity: return RSGDA_ERR_SCHEDULE;
    case ErrorCategory::infeasible: return RSGDA_ERR_INFEASIBLE;
    case ErrorCategory::plan: return RSGDA_ERR_PLAN;
    case ErrorCategory::format: return RSGDA_ERR_FORMAT;
    case ErrorCategory::io: return RSGDA_ERR_IO;
    case ErrorCategory::config: return RSGDA_ERR_CONFIG;
    case ErrorCategory::internal: return RSGDA_ERR_INTERNAL;
  }
  return RSGDA_ERR_INTERNAL;
}

template <typename Fn>
rsgda_status wrap(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RSGDA_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return map_category(e.category());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RSGDA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RSGDA_ERR_INTERNAL;
  }
}

rsgda_status require(bool ok, const char* msg) {
  if (ok) return RSGDA_OK;
  g_last_error = msg;
  return RSGDA_ERR_DOMAIN;
}

StepSchedule resolve_schedule(const rsgda_schedule_spec& spec, std::uint64_t N,
                              const NetworkShape& shape) {
  switch (spec.kind) {
    case RSGDA_SCHEDULE_CONSTANT:
      return StepSchedule::constant(spec.gamma);
    case RSGDA_SCHEDULE_OPTIMAL:
      return StepSchedule::constant_optimal(spec.D, N, shape);
    case RSGDA_SCHEDULE_POLY:
      return StepSchedule::polynomial(spec.gamma1, spec.p);
  }
  fail(ErrorCategory::domain, "unknown schedule kind");
}

NetworkShape shape_of(const Dataset& ds, std::uint32_t dh, int bias_in_loss) {
  NetworkShape s = ds.shape_for(static_cast<int>(dh), bias_in_loss != 0);
  s.validate();
  return s;
}

}  // namespace

extern "C" {

const char* rsgda_status_name(rsgda_status status) {
  switch (status) {
    case RSGDA_OK: return "ok";
    case RSGDA_ERR_DOMAIN: return "domain";
    case RSGDA_ERR_DIMENSION: return "dimension";
    case RSGDA_ERR_ENUM_LIMIT: return "enumeration_limit";
    case RSGDA_ERR_SCHEDULE: return "schedule_validity";
    case RSGDA_ERR_INFEASIBLE: return "infeasible";
    case RSGDA_ERR_PLAN: return "plan";
    case RSGDA_ERR_FORMAT: return "format";
    case RSGDA_ERR_IO: return "io";
    case RSGDA_ERR_CONFIG: return "config";
    case RSGDA_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

const char* rsgda_last_error(void) { return g_last_error.c_str(); }

const char* rsgda_version(void) { return "0.1.0"; }

rsgda_status rsgda_dataset_synthetic(uint64_t n, uint32_t dims, double rho,
                                     uint64_t seed, int with_bias,
                                     rsgda_dataset** out) {
  if (auto s = require(out != nullptr, "null output handle")) return s;
  return wrap([&] {
    Dataset ds = gen_synthetic(n, static_cast<int>(dims), rho, seed);
    if (with_bias) ds = ds.with_bias();
    *out = new rsgda_dataset{std::move(ds)};
  });
}

rsgda_status rsgda_dataset_from_idx(const char* path, int with_bias,
                                    rsgda_dataset** out) {
  if (auto s = require(out != nullptr && path != nullptr, "null argument"))
    return s;
  return wrap([&] {
    Dataset ds = load_idx(path);
    if (with_bias) ds = ds.with_bias();
    *out = new rsgda_dataset{std::move(ds)};
  });
}

rsgda_status rsgda_dataset_to_idx(const rsgda_dataset* ds, const char* path,
                                  uint32_t rows, uint32_t cols) {
  if (auto s = require(ds != nullptr && path != nullptr, "null argument"))
    return s;
  return wrap([&] {
    write_idx(ds->ds, path, static_cast<int>(rows), static_cast<int>(cols));
  });
}

uint64_t rsgda_dataset_rows(const rsgda_dataset* ds) {
  return ds == nullptr ? 0 : ds->ds.size();
}

uint32_t rsgda_dataset_dim(const rsgda_dataset* ds) {
  return ds == nullptr ? 0 : static_cast<uint32_t>(ds->ds.dim());
}

int rsgda_dataset_has_bias(const rsgda_dataset* ds) {
  return ds != nullptr && ds->ds.has_bias ? 1 : 0;
}

double rsgda_dataset_value(const rsgda_dataset* ds, uint64_t row,
                           uint32_t col) {
  if (ds == nullptr || row >= ds->ds.size() ||
      col >= static_cast<uint32_t>(ds->ds.dim()))
    return 0.0;
  return ds->ds.x(static_cast<Eigen::Index>(row),
                  static_cast<Eigen::Index>(col));
}

void rsgda_dataset_free(rsgda_dataset* ds) { delete ds; }

rsgda_status rsgda_optimal_step(double D, uint64_t N, uint32_t dh, uint32_t dv,
                                double L_prime, double* gamma) {
  if (auto s = require(gamma != nullptr, "null output")) return s;
  return wrap([&] {
    const NetworkShape shape{static_cast<int>(dv), static_cast<int>(dh), false};
    if (L_prime > 0.0) {
      const LipschitzEstimate lip{1.0, L_prime, 0};
      *gamma = optimal_constant_step(D, N, shape, &lip);
    } else {
      *gamma = optimal_constant_step(D, N, shape);
    }
  });
}

rsgda_status rsgda_convergence_bound(double D, double D_f, double L,
                                     double L_prime, uint64_t N, uint32_t dh,
                                     uint32_t dv, double* bound) {
  if (auto s = require(bound != nullptr, "null output")) return s;
  return wrap([&] {
    const NetworkShape shape{static_cast<int>(dv), static_cast<int>(dh), false};
    const LipschitzEstimate lip{L, L_prime, 0};
    *bound = convergence_bound(D, D_f, lip, N, shape);
  });
}

rsgda_status rsgda_expected_gradient_bound(const rsgda_schedule_spec* spec,
                                           uint64_t N, double L,
                                           double L_prime, double D_f,
                                           uint32_t dh, uint32_t dv,
                                           double* bound) {
  if (auto s = require(spec != nullptr && bound != nullptr, "null argument"))
    return s;
  return wrap([&] {
    const NetworkShape shape{static_cast<int>(dv), static_cast<int>(dh), false};
    const LipschitzEstimate lip{L, L_prime, 0};
    const StepSchedule sched = resolve_schedule(*spec, N, shape);
    *bound = expected_gradient_bound(sched, N, lip, D_f, shape);
  });
}

rsgda_status rsgda_sample_size(double r, double delta, double epsilon,
                               double t, uint32_t dh, uint32_t dv,
                               rsgda_sample_size_report* out) {
  if (auto s = require(out != nullptr, "null output")) return s;
  return wrap([&] {
    const NetworkShape shape{static_cast<int>(dv), static_cast<int>(dh), false};
    const SampleSizeReport rep = sample_size(r, delta, epsilon, t, shape);
    *out = rsgda_sample_size_report{rep.r,       rep.delta, rep.epsilon,
                                    rep.t,       rep.C,     rep.S,
                                    rep.N_calls, rep.S_min};
  });
}

rsgda_status rsgda_dda_sample_size(double r, double delta, double epsilon,
                                   double t, double tau, uint32_t dh,
                                   uint32_t dv,
                                   rsgda_dda_sample_size_report* out) {
  if (auto s = require(out != nullptr, "null output")) return s;
  return wrap([&] {
    const NetworkShape shape{static_cast<int>(dv), static_cast<int>(dh), false};
    const DdaSampleSize rep = dda_sample_size(r, delta, epsilon, t, tau, shape);
    *out = rsgda_dda_sample_size_report{rep.r, rep.delta, rep.epsilon,
                                        rep.t, rep.tau,   rep.M,
                                        rep.S};
  });
}

rsgda_status rsgda_subda_corruption(double zeta, double tau, double* q) {
  if (auto s = require(q != nullptr, "null output")) return s;
  return wrap([&] { *q = subda_corruption(zeta, tau); });
}

rsgda_status rsgda_min_subda_count(double tau, double phi, uint64_t* B) {
  if (auto s = require(B != nullptr, "null output")) return s;
  return wrap([&] { *B = min_subda_count(tau, phi); });
}

rsgda_status rsgda_dda_bounds(double D, double D_f, double L, double L_prime,
                              uint64_t N, uint64_t B, double tau, uint32_t dh,
                              uint32_t dv, double* gamma_b, double* bound) {
  if (auto s = require(gamma_b != nullptr && bound != nullptr, "null output"))
    return s;
  return wrap([&] {
    const NetworkShape shape{static_cast<int>(dv), static_cast<int>(dh), false};
    const LipschitzEstimate lip{L, L_prime, 0};
    const DdaBounds db = dda_bounds(D, D_f, lip, N, B, tau, shape);
    *gamma_b = db.gamma_b;
    *bound = db.bound;
  });
}

rsgda_status rsgda_train(const rsgda_dataset* ds,
                         const rsgda_train_config* config, rsgda_run** out) {
  if (auto s = require(ds != nullptr && config != nullptr && out != nullptr,
                       "null argument"))
    return s;
  return wrap([&] {
    const NetworkShape shape = shape_of(ds->ds, config->dh,
                                        config->bias_in_loss);
    const CorruptionModel model{config->zeta};
    const StepSchedule schedule =
        resolve_schedule(config->schedule, config->N, shape);

    StoppingRule stopping = StoppingRule::last();
    if (config->stopping == RSGDA_STOP_MIN_TAIL) {
      stopping = StoppingRule::min_grad_tail(
          config->tail > 0 ? config->tail : 100);
    } else if (config->stopping == RSGDA_STOP_SAMPLED) {
      const std::uint64_t probes =
          config->lipschitz_probes > 0 ? config->lipschitz_probes : 2000;
      const LipschitzEstimate lip =
          estimate_lipschitz(ds->ds, model, shape, probes,
                             Rng(config->seed).split(8));
      stopping = StoppingRule::sampled(
          make_stopping_distribution(schedule, config->N, lip, shape));
    }

    RSGRun run = rsg_run(ds->ds, model, shape, schedule, config->N, stopping,
                         config->seed);
    *out = new rsgda_run{std::move(run)};
  });
}

uint64_t rsgda_run_iterations(const rsgda_run* run) {
  return run == nullptr ? 0 : run->run.iterations;
}

uint64_t rsgda_run_stop_iteration(const rsgda_run* run) {
  return run == nullptr ? 0 : run->run.stop_iteration;
}

double rsgda_run_f_initial(const rsgda_run* run) {
  return run == nullptr ? 0.0 : run->run.f_initial;
}

double rsgda_run_f_best(const rsgda_run* run) {
  return run == nullptr ? 0.0 : run->run.f_best;
}

double rsgda_run_trailing_grad(const rsgda_run* run, uint64_t window) {
  if (run == nullptr || run->run.grad_norm_history.empty()) return 0.0;
  return trailing_average(run->run.grad_norm_history,
                          window > 0 ? window : 100);
}

uint32_t rsgda_run_dh(const rsgda_run* run) {
  return run == nullptr ? 0 : static_cast<uint32_t>(run->run.w_final.shape.d_h);
}

uint32_t rsgda_run_dv(const rsgda_run* run) {
  return run == nullptr ? 0 : static_cast<uint32_t>(run->run.w_final.shape.d_v);
}

rsgda_status rsgda_run_weights(const rsgda_run* run, double* buf,
                               uint64_t buflen) {
  if (auto s = require(run != nullptr && buf != nullptr, "null argument"))
    return s;
  return wrap([&] {
    const Matrix& m = run->run.w_final.m;
    const std::uint64_t need =
        static_cast<std::uint64_t>(m.rows()) * static_cast<std::uint64_t>(m.cols());
    if (buflen < need)
      fail(ErrorCategory::dimension, "weight buffer too small");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        buf[static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(m.cols()) +
            static_cast<std::uint64_t>(j)] = m(i, j);
  });
}

void rsgda_run_free(rsgda_run* run) { delete run; }

rsgda_status rsgda_dda_train(const rsgda_dataset* ds,
                             const rsgda_dda_config* config,
                             rsgda_dda_run** out) {
  if (auto s = require(ds != nullptr && config != nullptr && out != nullptr,
                       "null argument"))
    return s;
  return wrap([&] {
    const NetworkShape shape = shape_of(ds->ds, config->dh,
                                        config->bias_in_loss);
    double tau = config->tau;
    if (tau <= 0.0) {
      if (config->B == 0)
        fail(ErrorCategory::plan, "either tau or B must be given");
      tau = 1.0 / static_cast<double>(config->B);
    }
    PlanOptions po;
    po.clamp_q = config->clamp_q != 0;
    if (config->mode == RSGDA_PLAN_REPLACEMENT) po.B_override = config->B;
    const PlanMode mode = config->mode == RSGDA_PLAN_REPLACEMENT
                              ? PlanMode::with_replacement
                              : PlanMode::disjoint_partition;
    const std::uint64_t meta =
        config->meta_iterations > 0 ? config->meta_iterations : 1;
    const SubDAPlan plan = plan_subdas(shape, config->zeta, tau,
                                       config->phi > 0.0 ? config->phi : 0.01,
                                       mode, meta, config->seed, po);

    NetworkShape block = shape;
    block.d_v = static_cast<int>(plan.subsets.front().size()) +
                (shape.bias ? 1 : 0);
    const StepSchedule schedule =
        resolve_schedule(config->schedule, config->n_per_subda, block);

    DdaOptions opts;
    opts.warm_start = config->warm_start;
    opts.workers = static_cast<int>(config->workers);
    const ExecutionMode exec = config->workers > 0 ? ExecutionMode::parallel
                                                   : ExecutionMode::sequential;
    DdaResult res = run_distributed(plan, ds->ds, schedule,
                                    config->n_per_subda, exec, config->seed,
                                    opts);
    *out = new rsgda_dda_run{std::move(res)};
  });
}

uint64_t rsgda_dda_run_b(const rsgda_dda_run* run) {
  return run == nullptr ? 0 : run->res.plan.B;
}

double rsgda_dda_run_q(const rsgda_dda_run* run) {
  return run == nullptr ? 0.0 : run->res.plan.q;
}

double rsgda_dda_run_wall_ms(const rsgda_dda_run* run) {
  return run == nullptr ? 0.0 : run->res.wall_ms;
}

uint32_t rsgda_dda_run_dh(const rsgda_dda_run* run) {
  return run == nullptr ? 0 : static_cast<uint32_t>(run->res.w.shape.d_h);
}

uint32_t rsgda_dda_run_dv(const rsgda_dda_run* run) {
  return run == nullptr ? 0 : static_cast<uint32_t>(run->res.w.shape.d_v);
}

rsgda_status rsgda_dda_run_weights(const rsgda_dda_run* run, double* buf,
                                   uint64_t buflen) {
  if (auto s = require(run != nullptr && buf != nullptr, "null argument"))
    return s;
  return wrap([&] {
    const Matrix& m = run->res.w.m;
    const std::uint64_t need =
        static_cast<std::uint64_t>(m.rows()) * static_cast<std::uint64_t>(m.cols());
    if (buflen < need)
      fail(ErrorCategory::dimension, "weight buffer too small");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        buf[static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(m.cols()) +
            static_cast<std::uint64_t>(j)] = m(i, j);
  });
}

rsgda_status rsgda_dda_run_grad_norm(const rsgda_dda_run* run,
                                     const rsgda_dataset* ds, double zeta,
                                     uint64_t draws, uint64_t seed,
                                     double* out) {
  if (auto s = require(run != nullptr && ds != nullptr && out != nullptr,
                       "null argument"))
    return s;
  return wrap([&] {
    GradNormPolicy policy;
    policy.mode = GradNormPolicy::Mode::monte_carlo;
    policy.draws = draws > 0 ? draws : 10000;
    *out = grad_norm_estimate(run->res.w, ds->ds, CorruptionModel{zeta},
                              policy, Rng(seed));
  });
}

void rsgda_dda_run_free(rsgda_dda_run* run) { delete run; }

rsgda_status rsgda_experiment(const char* kind, const char* config_kv,
                              const char* out_dir) {
  if (auto s = require(kind != nullptr && out_dir != nullptr, "null argument"))
    return s;
  return wrap([&] {
    KvConfig cfg;
    if (config_kv != nullptr) cfg = KvConfig::parse_text(config_kv);
    run_experiment(kind, std::move(cfg), out_dir);
  });
}

rsgda_status rsgda_check(int verbose, uint32_t* failures) {
  if (auto s = require(failures != nullptr, "null output")) return s;
  return wrap([&] {
    *failures = static_cast<uint32_t>(run_self_checks(std::cout, verbose != 0));
  });
}

}  // extern "C"
