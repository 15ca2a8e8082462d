/* rsgda: randomized stochastic gradient pre-training for denoising
 * autoencoders, with closed-form convergence and sample-size calculators and
 * a synchronous distributed sub-network trainer.
 *
 * All entry points return rsgda_status; on failure rsgda_last_error() holds a
 * thread-local message. Handles are opaque and freed by their *_free call.
 */
#ifndef RSGDA_H
#define RSGDA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsgda_status {
  RSGDA_OK = 0,
  RSGDA_ERR_DOMAIN = 1,
  RSGDA_ERR_DIMENSION = 2,
  RSGDA_ERR_ENUM_LIMIT = 3,
  RSGDA_ERR_SCHEDULE = 4,
  RSGDA_ERR_INFEASIBLE = 5,
  RSGDA_ERR_PLAN = 6,
  RSGDA_ERR_FORMAT = 7,
  RSGDA_ERR_IO = 8,
  RSGDA_ERR_CONFIG = 9,
  RSGDA_ERR_INTERNAL = 10
} rsgda_status;

const char* rsgda_status_name(rsgda_status status);
const char* rsgda_last_error(void);
const char* rsgda_version(void);

/* ---- datasets ---- */

typedef struct rsgda_dataset rsgda_dataset;

/* Latent Gaussians with constant pairwise correlation rho squashed into
 * [0, 1]. with_bias appends a constant-1 column. */
rsgda_status rsgda_dataset_synthetic(uint64_t n, uint32_t dims, double rho,
                                     uint64_t seed, int with_bias,
                                     rsgda_dataset** out);
/* IDX image file (magic 0x00000803); pixels scaled into [0, 1]. */
rsgda_status rsgda_dataset_from_idx(const char* path, int with_bias,
                                    rsgda_dataset** out);
rsgda_status rsgda_dataset_to_idx(const rsgda_dataset* ds, const char* path,
                                  uint32_t rows, uint32_t cols);
uint64_t rsgda_dataset_rows(const rsgda_dataset* ds);
uint32_t rsgda_dataset_dim(const rsgda_dataset* ds); /* includes bias column */
int rsgda_dataset_has_bias(const rsgda_dataset* ds);
double rsgda_dataset_value(const rsgda_dataset* ds, uint64_t row,
                           uint32_t col);
void rsgda_dataset_free(rsgda_dataset* ds);

/* ---- step schedules ---- */

typedef enum rsgda_schedule_kind {
  RSGDA_SCHEDULE_CONSTANT = 0, /* gamma_k = gamma */
  RSGDA_SCHEDULE_OPTIMAL = 1,  /* gamma_k = D / (sqrt(N) (dh dv)^{3/4}) */
  RSGDA_SCHEDULE_POLY = 2      /* gamma_k = gamma1 / k^p */
} rsgda_schedule_kind;

typedef struct rsgda_schedule_spec {
  rsgda_schedule_kind kind;
  double gamma;  /* constant */
  double D;      /* optimal */
  double gamma1; /* poly */
  double p;      /* poly */
} rsgda_schedule_spec;

/* ---- closed-form calculators ---- */

/* gamma = D / (sqrt(N) (dh dv)^{3/4}); pass L_prime <= 0 to skip the D-range
 * check. */
rsgda_status rsgda_optimal_step(double D, uint64_t N, uint32_t dh, uint32_t dv,
                                double L_prime, double* gamma);
/* (D_f/D + D L^2 L') (dh dv)^{3/4} / sqrt(N). */
rsgda_status rsgda_convergence_bound(double D, double D_f, double L,
                                     double L_prime, uint64_t N, uint32_t dh,
                                     uint32_t dv, double* bound);
/* Guarantee on E||grad f||^2 under the randomized stopping law after N
 * iterations of the given schedule. */
rsgda_status rsgda_expected_gradient_bound(const rsgda_schedule_spec* spec,
                                           uint64_t N, double L,
                                           double L_prime, double D_f,
                                           uint32_t dh, uint32_t dv,
                                           double* bound);

typedef struct rsgda_sample_size_report {
  double r, delta, epsilon, t;
  uint64_t C;       /* independent runs */
  uint64_t S;       /* data instances */
  uint64_t N_calls; /* oracle calls per run */
  uint64_t S_min;   /* instance floor as r -> 1 */
} rsgda_sample_size_report;

rsgda_status rsgda_sample_size(double r, double delta, double epsilon,
                               double t, uint32_t dh, uint32_t dv,
                               rsgda_sample_size_report* out);

typedef struct rsgda_dda_sample_size_report {
  double r, delta, epsilon, t, tau;
  uint64_t M; /* meta-iterations */
  uint64_t S; /* data instances */
} rsgda_dda_sample_size_report;

rsgda_status rsgda_dda_sample_size(double r, double delta, double epsilon,
                                   double t, double tau, uint32_t dh,
                                   uint32_t dv,
                                   rsgda_dda_sample_size_report* out);

/* q = 1 - (1 - zeta) / tau, feasible for 1 - zeta < tau < 1. */
rsgda_status rsgda_subda_corruption(double zeta, double tau, double* q);
/* Smallest B with coverage failure below phi: ceil(log(phi)/log(1-tau)). */
rsgda_status rsgda_min_subda_count(double tau, double phi, uint64_t* B);
/* Sub-network optimal step and convergence guarantee. */
rsgda_status rsgda_dda_bounds(double D, double D_f, double L, double L_prime,
                              uint64_t N, uint64_t B, double tau, uint32_t dh,
                              uint32_t dv, double* gamma_b, double* bound);

/* ---- training ---- */

typedef enum rsgda_stopping_kind {
  RSGDA_STOP_SAMPLED = 0,  /* R drawn from the stopping law up front */
  RSGDA_STOP_MIN_TAIL = 1, /* R = argmin ||G||^2 over the last `tail` iters */
  RSGDA_STOP_LAST = 2
} rsgda_stopping_kind;

typedef struct rsgda_train_config {
  uint32_t dh;
  double zeta;
  uint64_t N;
  uint64_t seed;
  rsgda_schedule_spec schedule;
  rsgda_stopping_kind stopping;
  uint64_t tail;            /* min_tail window; 0 means 100 */
  int bias_in_loss;         /* nonzero: bias reconstruction term included */
  uint64_t lipschitz_probes; /* sampled stopping; 0 means 2000 */
} rsgda_train_config;

typedef struct rsgda_run rsgda_run;

rsgda_status rsgda_train(const rsgda_dataset* ds,
                         const rsgda_train_config* config, rsgda_run** out);
uint64_t rsgda_run_iterations(const rsgda_run* run);
uint64_t rsgda_run_stop_iteration(const rsgda_run* run);
double rsgda_run_f_initial(const rsgda_run* run);
double rsgda_run_f_best(const rsgda_run* run);
/* Mean of the last min(window, N) noisy squared gradient norms. */
double rsgda_run_trailing_grad(const rsgda_run* run, uint64_t window);
uint32_t rsgda_run_dh(const rsgda_run* run);
uint32_t rsgda_run_dv(const rsgda_run* run);
/* Copies the selected parameters, row-major dh x dv. buflen must be at least
 * dh * dv. */
rsgda_status rsgda_run_weights(const rsgda_run* run, double* buf,
                               uint64_t buflen);
void rsgda_run_free(rsgda_run* run);

/* ---- distributed training ---- */

typedef enum rsgda_plan_mode {
  RSGDA_PLAN_DISJOINT = 0,
  RSGDA_PLAN_REPLACEMENT = 1
} rsgda_plan_mode;

typedef struct rsgda_dda_config {
  uint32_t dh;
  double zeta;
  double tau;  /* <= 0: derive as 1/B from the B field */
  double phi;  /* 0: default 0.01 */
  uint64_t B;  /* 0: derive from tau and phi */
  rsgda_plan_mode mode;
  uint64_t meta_iterations; /* 0 means 1 */
  uint64_t n_per_subda;
  uint32_t workers; /* 0: sequential; otherwise parallel with this many */
  uint64_t seed;
  rsgda_schedule_spec schedule; /* sized against one sub-network block */
  uint64_t warm_start; /* plain iterations before the sub-network phase */
  int clamp_q;         /* nonzero: replace infeasible q by 0 */
  int bias_in_loss;
} rsgda_dda_config;

typedef struct rsgda_dda_run rsgda_dda_run;

rsgda_status rsgda_dda_train(const rsgda_dataset* ds,
                             const rsgda_dda_config* config,
                             rsgda_dda_run** out);
uint64_t rsgda_dda_run_b(const rsgda_dda_run* run);
double rsgda_dda_run_q(const rsgda_dda_run* run);
double rsgda_dda_run_wall_ms(const rsgda_dda_run* run);
uint32_t rsgda_dda_run_dh(const rsgda_dda_run* run);
uint32_t rsgda_dda_run_dv(const rsgda_dda_run* run);
rsgda_status rsgda_dda_run_weights(const rsgda_dda_run* run, double* buf,
                                   uint64_t buflen);
/* Unbiased seeded Monte Carlo estimate of ||grad f||^2 of the full-network
 * objective at the final parameters. */
rsgda_status rsgda_dda_run_grad_norm(const rsgda_dda_run* run,
                                     const rsgda_dataset* ds, double zeta,
                                     uint64_t draws, uint64_t seed,
                                     double* out);
void rsgda_dda_run_free(rsgda_dda_run* run);

/* ---- experiments and checks ---- */

/* kind: grad_vs_N | grad_vs_shape | grad_vs_B | speedup |
 * generalization_parity. config_kv: newline-separated key=value overrides
 * (may be NULL). Writes <out_dir>/<kind>.csv and <out_dir>/manifest.txt. */
rsgda_status rsgda_experiment(const char* kind, const char* config_kv,
                              const char* out_dir);

/* Runs the built-in verification battery; returns RSGDA_OK with *failures set.
 * Prints one line per check to stdout when verbose is nonzero. */
rsgda_status rsgda_check(int verbose, uint32_t* failures);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RSGDA_H */
