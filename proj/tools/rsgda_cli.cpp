// Command-line driver over the rsgda C API: training runs, distributed
// sub-network training, the experiment families, sample-size estimates, and
// the built-in check battery.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rsgda/rsgda.h"

namespace {

int fail_status(rsgda_status status) {
  std::fprintf(stderr, "error: %s: %s\n", rsgda_status_name(status),
               rsgda_last_error());
  return static_cast<int>(status);
}

struct SharedFlags {
  std::uint64_t dv = 16;
  std::uint64_t dh = 8;
  double zeta = 0.3;
  std::uint64_t N = 10000;
  std::uint64_t seed = 1;
  std::string schedule = "optimal";
  double gamma = 0.001;
  double D = 1.0;
  double p = 0.75;
  std::string out;
  std::string data;
  std::uint64_t n = 1000;
  double rho = 0.2;
  bool bias = true;
  bool bias_in_loss = true;
};

void add_shared(CLI::App* cmd, SharedFlags& f) {
  cmd->add_option("--dv", f.dv, "visible units (data dimensions)");
  cmd->add_option("--dh", f.dh, "hidden units");
  cmd->add_option("--zeta", f.zeta, "corruption probability");
  cmd->add_option("--N", f.N, "iteration count");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--schedule", f.schedule, "step schedule kind")
      ->check(CLI::IsMember({"constant", "optimal", "poly"}));
  cmd->add_option("--gamma", f.gamma, "constant step size");
  cmd->add_option("--D", f.D, "optimal-step constant");
  cmd->add_option("--p", f.p, "polynomial step exponent");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--data", f.data, "IDX dataset path (default: synthetic)");
  cmd->add_option("--n", f.n, "synthetic instance count");
  cmd->add_option("--rho", f.rho, "synthetic pairwise correlation");
  cmd->add_flag("--bias,!--no-bias", f.bias, "append the constant-1 column");
  cmd->add_flag("--bias-loss,!--no-bias-loss", f.bias_in_loss,
                "include the bias reconstruction term in the loss");
  cmd->set_config("--config")->description("flat key=value config file");
}

rsgda_schedule_spec schedule_spec(const SharedFlags& f) {
  rsgda_schedule_spec spec{};
  if (f.schedule == "constant") {
    spec.kind = RSGDA_SCHEDULE_CONSTANT;
    spec.gamma = f.gamma;
  } else if (f.schedule == "poly") {
    spec.kind = RSGDA_SCHEDULE_POLY;
    spec.gamma1 = f.gamma;
    spec.p = f.p;
  } else {
    spec.kind = RSGDA_SCHEDULE_OPTIMAL;
    spec.D = f.D;
  }
  return spec;
}

rsgda_status make_dataset(const SharedFlags& f, rsgda_dataset** out) {
  if (!f.data.empty())
    return rsgda_dataset_from_idx(f.data.c_str(), f.bias ? 1 : 0, out);
  return rsgda_dataset_synthetic(f.n, static_cast<uint32_t>(f.dv), f.rho,
                                 f.seed, f.bias ? 1 : 0, out);
}

int write_weights_csv(const std::string& dir, const char* name, uint32_t dh,
                      uint32_t dv, const std::vector<double>& w) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream out(std::filesystem::path(dir) / name,
                    std::ios::binary | std::ios::trunc);
  if (!out) {
    std::fprintf(stderr, "error: io: cannot write %s/%s\n", dir.c_str(), name);
    return static_cast<int>(RSGDA_ERR_IO);
  }
  out.precision(17);
  for (uint32_t i = 0; i < dh; ++i) {
    for (uint32_t j = 0; j < dv; ++j) {
      if (j) out << ',';
      out << w[static_cast<std::size_t>(i) * dv + j];
    }
    out << '\n';
  }
  return 0;
}

int run_train(const SharedFlags& f, const std::string& stopping,
              std::uint64_t tail) {
  rsgda_dataset* ds = nullptr;
  if (auto s = make_dataset(f, &ds)) return fail_status(s);

  rsgda_train_config cfg{};
  cfg.dh = static_cast<uint32_t>(f.dh);
  cfg.zeta = f.zeta;
  cfg.N = f.N;
  cfg.seed = f.seed;
  cfg.schedule = schedule_spec(f);
  cfg.tail = tail;
  cfg.bias_in_loss = f.bias_in_loss ? 1 : 0;
  cfg.stopping = stopping == "sampled"   ? RSGDA_STOP_SAMPLED
                 : stopping == "mintail" ? RSGDA_STOP_MIN_TAIL
                                         : RSGDA_STOP_LAST;

  rsgda_run* run = nullptr;
  const rsgda_status s = rsgda_train(ds, &cfg, &run);
  rsgda_dataset_free(ds);
  if (s != RSGDA_OK) return fail_status(s);

  std::printf("iterations=%" PRIu64 "\n", rsgda_run_iterations(run));
  std::printf("stop_iteration=%" PRIu64 "\n", rsgda_run_stop_iteration(run));
  std::printf("f_initial=%.10g\n", rsgda_run_f_initial(run));
  std::printf("f_best=%.10g\n", rsgda_run_f_best(run));
  std::printf("trailing_grad=%.10g\n", rsgda_run_trailing_grad(run, 100));

  int rc = 0;
  if (!f.out.empty()) {
    const uint32_t dh = rsgda_run_dh(run);
    const uint32_t dv = rsgda_run_dv(run);
    std::vector<double> w(static_cast<std::size_t>(dh) * dv);
    if (auto ws = rsgda_run_weights(run, w.data(), w.size()))
      rc = fail_status(ws);
    else
      rc = write_weights_csv(f.out, "weights.csv", dh, dv, w);
  }
  rsgda_run_free(run);
  return rc;
}

int run_dda(const SharedFlags& f, double tau, double phi, std::uint64_t B,
            const std::string& mode, std::uint64_t workers, std::uint64_t meta,
            std::uint64_t n_per, std::uint64_t warm, bool clamp_q) {
  rsgda_dataset* ds = nullptr;
  if (auto s = make_dataset(f, &ds)) return fail_status(s);

  rsgda_dda_config cfg{};
  cfg.dh = static_cast<uint32_t>(f.dh);
  cfg.zeta = f.zeta;
  cfg.tau = tau;
  cfg.phi = phi;
  cfg.B = B;
  cfg.mode = mode == "replacement" ? RSGDA_PLAN_REPLACEMENT
                                   : RSGDA_PLAN_DISJOINT;
  cfg.meta_iterations = meta;
  cfg.n_per_subda = n_per > 0 ? n_per : f.N;
  cfg.workers = static_cast<uint32_t>(workers);
  cfg.seed = f.seed;
  cfg.schedule = schedule_spec(f);
  cfg.warm_start = warm;
  cfg.clamp_q = clamp_q ? 1 : 0;
  cfg.bias_in_loss = f.bias_in_loss ? 1 : 0;

  rsgda_dda_run* run = nullptr;
  rsgda_status s = rsgda_dda_train(ds, &cfg, &run);
  if (s != RSGDA_OK) {
    rsgda_dataset_free(ds);
    return fail_status(s);
  }

  double gn = 0.0;
  s = rsgda_dda_run_grad_norm(run, ds, f.zeta, 20000, f.seed + 7, &gn);
  rsgda_dataset_free(ds);
  if (s != RSGDA_OK) {
    rsgda_dda_run_free(run);
    return fail_status(s);
  }

  std::printf("B=%" PRIu64 "\n", rsgda_dda_run_b(run));
  std::printf("q=%.10g\n", rsgda_dda_run_q(run));
  std::printf("wall_ms=%.3f\n", rsgda_dda_run_wall_ms(run));
  std::printf("grad_norm_estimate=%.10g\n", gn);

  int rc = 0;
  if (!f.out.empty()) {
    const uint32_t dh = rsgda_dda_run_dh(run);
    const uint32_t dv = rsgda_dda_run_dv(run);
    std::vector<double> w(static_cast<std::size_t>(dh) * dv);
    if (auto ws = rsgda_dda_run_weights(run, w.data(), w.size()))
      rc = fail_status(ws);
    else
      rc = write_weights_csv(f.out, "weights.csv", dh, dv, w);
  }
  rsgda_dda_run_free(run);
  return rc;
}

int run_experiment_cmd(const SharedFlags& f, const std::string& kind,
                       const std::vector<std::string>& sets,
                       const CLI::App* cmd) {
  if (f.out.empty()) {
    std::fprintf(stderr, "error: config: experiment requires --out\n");
    return static_cast<int>(RSGDA_ERR_CONFIG);
  }
  // Assemble key=value overrides from explicitly given shared flags, then
  // from --set pairs (highest precedence).
  std::string kv;
  const auto add = [&](const char* flag, const char* key,
                       const std::string& value) {
    if (cmd->count(flag) > 0) kv += std::string(key) + "=" + value + "\n";
  };
  add("--dv", "dv", std::to_string(f.dv));
  add("--dh", "dh", std::to_string(f.dh));
  add("--zeta", "zeta", std::to_string(f.zeta));
  add("--N", "N", std::to_string(f.N));
  add("--seed", "seed", std::to_string(f.seed));
  add("--schedule", "schedule", f.schedule);
  add("--gamma", "gamma", std::to_string(f.gamma));
  add("--D", "D", std::to_string(f.D));
  add("--p", "p", std::to_string(f.p));
  add("--data", "data", f.data);
  add("--n", "n", std::to_string(f.n));
  add("--rho", "rho", std::to_string(f.rho));
  add("--bias", "bias", f.bias ? "1" : "0");
  add("--bias-loss", "bias_in_loss", f.bias_in_loss ? "1" : "0");
  for (const auto& s : sets) kv += s + "\n";

  if (auto s = rsgda_experiment(kind.c_str(), kv.c_str(), f.out.c_str()))
    return fail_status(s);
  std::printf("wrote %s/%s.csv\n", f.out.c_str(), kind.c_str());
  return 0;
}

int run_estimate(double r, double delta, double epsilon, double t, double tau,
                 std::uint64_t dh, std::uint64_t dv) {
  if (tau > 0.0) {
    rsgda_dda_sample_size_report rep{};
    if (auto s = rsgda_dda_sample_size(r, delta, epsilon, t, tau,
                                       static_cast<uint32_t>(dh),
                                       static_cast<uint32_t>(dv), &rep))
      return fail_status(s);
    std::printf("M=%" PRIu64 "\nS=%" PRIu64 "\n", rep.M, rep.S);
    return 0;
  }
  rsgda_sample_size_report rep{};
  if (auto s = rsgda_sample_size(r, delta, epsilon, t,
                                 static_cast<uint32_t>(dh),
                                 static_cast<uint32_t>(dv), &rep))
    return fail_status(s);
  std::printf("C=%" PRIu64 "\nS=%" PRIu64 "\nN_calls=%" PRIu64
              "\nS_min=%" PRIu64 "\n",
              rep.C, rep.S, rep.N_calls, rep.S_min);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"denoising-autoencoder pre-training with randomized "
               "stochastic gradients"};
  app.require_subcommand(1);

  SharedFlags tf, df, ef;
  std::string stopping = "last";
  std::uint64_t tail = 100;
  CLI::App* train = app.add_subcommand("train", "run one RSG training");
  add_shared(train, tf);
  train->add_option("--stopping", stopping, "stopping rule")
      ->check(CLI::IsMember({"sampled", "mintail", "last"}));
  train->add_option("--tail", tail, "mintail window");

  double tau = 0.0, phi = 0.01;
  std::uint64_t B = 0, workers = 0, meta = 1, n_per = 0, warm = 200;
  bool clamp_q = false;
  std::string mode = "disjoint";
  CLI::App* dda = app.add_subcommand("dda", "distributed sub-network training");
  add_shared(dda, df);
  dda->add_option("--tau", tau, "visible fraction per sub-network");
  dda->add_option("--phi", phi, "coverage failure probability");
  dda->add_option("--B", B, "sub-network count");
  dda->add_option("--mode", mode, "subset sampling mode")
      ->check(CLI::IsMember({"disjoint", "replacement"}));
  dda->add_option("--workers", workers, "parallel workers (0: sequential)");
  dda->add_option("--meta", meta, "meta-iterations");
  dda->add_option("--n-per", n_per, "updates per sub-network (default --N)");
  dda->add_option("--warm", warm, "non-distributed warm-start iterations");
  dda->add_flag("--clamp-q", clamp_q, "replace infeasible q by 0");

  std::string kind;
  std::vector<std::string> sets;
  CLI::App* exp = app.add_subcommand("experiment", "run an experiment family");
  add_shared(exp, ef);
  exp->add_option("--kind", kind, "experiment kind")
      ->required()
      ->check(CLI::IsMember({"grad_vs_N", "grad_vs_shape", "grad_vs_B",
                             "speedup", "generalization_parity"}));
  exp->add_option("--set", sets, "extra key=value overrides");

  double r = 4.0, delta = 0.05, epsilon = 0.05, t = 1000.0, est_tau = 0.0;
  std::uint64_t est_dh = 20, est_dv = 100;
  CLI::App* est = app.add_subcommand("estimate", "sample-size calculator");
  est->add_option("--r", r, "fold/sample trade-off constant (> 1)");
  est->add_option("--delta", delta, "failure probability");
  est->add_option("--epsilon", epsilon, "gradient tolerance");
  est->add_option("--t", t, "average reuses per instance");
  est->add_option("--tau", est_tau, "sub-network fraction (distributed)");
  est->add_option("--dh", est_dh, "hidden units");
  est->add_option("--dv", est_dv, "visible units");

  bool verbose = false;
  CLI::App* check = app.add_subcommand("check", "run the oracle check battery");
  check->add_flag("--verbose", verbose, "print failure details");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return 64;
  }

  try {
    if (train->parsed()) return run_train(tf, stopping, tail);
    if (dda->parsed())
      return run_dda(df, tau, phi, B, mode, workers, meta, n_per, warm,
                     clamp_q);
    if (exp->parsed()) return run_experiment_cmd(ef, kind, sets, exp);
    if (est->parsed())
      return run_estimate(r, delta, epsilon, t, est_tau, est_dh, est_dv);
    if (check->parsed()) {
      uint32_t failures = 0;
      if (auto s = rsgda_check(1, &failures)) return fail_status(s);
      std::printf("failures=%u\n", failures);
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return static_cast<int>(RSGDA_ERR_INTERNAL);
  }
  return 0;
}
