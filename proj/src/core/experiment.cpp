#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dda.hpp"
#include "oracle.hpp"
#include "rsg.hpp"

namespace rsgda {

double trailing_average(const std::vector<double>& history,
                        std::size_t window) {
  if (history.empty()) fail(ErrorCategory::domain, "empty gradient history");
  if (window == 0) fail(ErrorCategory::domain, "window must be positive");
  const std::size_t take = std::min(window, history.size());
  double total = 0.0;
  for (std::size_t i = history.size() - take; i < history.size(); ++i)
    total += history[i];
  return total / static_cast<double>(take);
}

KvConfig KvConfig::parse_text(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    line.erase(line.begin(),
               std::find_if(line.begin(), line.end(), notspace));
    line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(),
               line.end());
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(ErrorCategory::config,
           "config line " + std::to_string(lineno) + " is not key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(std::find_if(key.rbegin(), key.rend(), notspace).base(),
              key.end());
    value.erase(value.begin(),
                std::find_if(value.begin(), value.end(), notspace));
    cfg.values[key] = value;
  }
  return cfg;
}

KvConfig KvConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::io, path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

std::string KvConfig::get_string(const std::string& key,
                                 const std::string& def) const {
  const auto it = values.find(key);
  return it == values.end() ? def : it->second;
}

double KvConfig::get_double(const std::string& key, double def) const {
  const auto it = values.find(key);
  if (it == values.end()) return def;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCategory::config, "config key " + key + " is not a number: " +
                                    it->second);
  }
}

std::uint64_t KvConfig::get_u64(const std::string& key,
                                std::uint64_t def) const {
  const double v = get_double(key, static_cast<double>(def));
  if (v < 0 || v != std::floor(v))
    fail(ErrorCategory::config, "config key " + key + " is not a count");
  return static_cast<std::uint64_t>(v);
}

int KvConfig::get_int(const std::string& key, int def) const {
  return static_cast<int>(get_u64(key, static_cast<std::uint64_t>(def)));
}

bool KvConfig::get_bool(const std::string& key, bool def) const {
  const auto it = values.find(key);
  if (it == values.end()) return def;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  fail(ErrorCategory::config, "config key " + key + " is not a flag: " + v);
}

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

}  // namespace

std::vector<double> KvConfig::get_double_list(const std::string& key,
                                              const std::string& def) const {
  const std::string raw = get_string(key, def);
  std::vector<double> out;
  for (const auto& item : split_commas(raw)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCategory::config,
           "config key " + key + " has a non-numeric item: " + item);
    }
  }
  if (out.empty()) fail(ErrorCategory::config, "config key " + key + " is empty");
  return out;
}

std::vector<std::uint64_t> KvConfig::get_u64_list(const std::string& key,
                                                  const std::string& def) const {
  std::vector<std::uint64_t> out;
  for (const double v : get_double_list(key, def)) {
    if (v < 0 || v != std::floor(v))
      fail(ErrorCategory::config, "config key " + key + " has a non-count item");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

std::string KvConfig::serialized() const {
  std::string out;
  for (const auto& [k, v] : values) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_x(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, static_cast<long long>(v));
    return std::string(buf, res.ptr);
  }
  return format_double(v);
}

}  // namespace

void write_csv(const std::vector<ExperimentRecord>& records,
               const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::io, path + ": cannot open for writing");
  out << "experiment,series,x_name,x_value,grad_raw,grad_norm,seed,elapsed_ms\n";
  for (const auto& r : records) {
    out << r.experiment << ',' << r.series << ',' << r.x_name << ','
        << format_x(r.x_value) << ',' << format_double(r.grad_raw) << ','
        << format_double(r.grad_norm) << ',' << r.seed << ',' << r.elapsed_ms
        << '\n';
  }
  if (!out) fail(ErrorCategory::io, path + ": write failed");
}

const char* const kExperimentKinds[5] = {"grad_vs_N", "grad_vs_shape",
                                         "grad_vs_B", "speedup",
                                         "generalization_parity"};

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ms_since(Clock::time_point t0, bool deterministic) {
  if (deterministic) return 0;
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0)
          .count());
}

// Normalizes grad_norm within each (series, seed) group.
void normalize_records(std::vector<ExperimentRecord>& records) {
  std::map<std::pair<std::string, std::uint64_t>, double> peak;
  for (const auto& r : records) {
    auto& m = peak[{r.series, r.seed}];
    m = std::max(m, r.grad_raw);
  }
  for (auto& r : records) {
    const double m = peak[{r.series, r.seed}];
    r.grad_norm = m > 0.0 ? r.grad_raw / m : 0.0;
  }
}

Dataset build_dataset(const KvConfig& cfg, std::uint64_t data_seed, int dims) {
  Dataset ds;
  const std::string path = cfg.get_string("data", "");
  if (!path.empty()) {
    ds = load_idx(path);
  } else {
    ds = gen_synthetic(cfg.get_u64("n", 1000), dims,
                       cfg.get_double("rho", 0.2), data_seed);
  }
  if (cfg.get_bool("bias", true)) ds = ds.with_bias();
  return ds;
}

void check_known_keys(const KvConfig& cfg, const std::set<std::string>& known) {
  for (const auto& [k, v] : cfg.values)
    if (known.find(k) == known.end())
      fail(ErrorCategory::config, "unknown config key: " + k);
}

const std::set<std::string> kSharedKeys = {
    "dv",    "dh",         "zeta",  "bias",   "bias_in_loss",
    "n",     "rho",        "data",  "seed",   "seeds",
    "window", "probe_stride", "probe_draws", "deterministic_timing",
    "schedule", "gamma",   "D",     "p",      "gamma1"};

StepSchedule schedule_from_config(const KvConfig& cfg, double series_value,
                                  std::uint64_t N, const NetworkShape& shape) {
  const std::string kind = cfg.get_string("schedule", "optimal");
  if (kind == "constant") return StepSchedule::constant(series_value);
  if (kind == "optimal")
    return StepSchedule::constant_optimal(series_value, N, shape);
  if (kind == "poly")
    return StepSchedule::polynomial(series_value, cfg.get_double("p", 0.75));
  fail(ErrorCategory::config, "unknown schedule kind: " + kind);
}

double default_series_value(const KvConfig& cfg) {
  const std::string kind = cfg.get_string("schedule", "optimal");
  if (kind == "constant") return cfg.get_double("gamma", 0.001);
  if (kind == "poly") return cfg.get_double("gamma1", 0.01);
  return cfg.get_double("D", 1.0);
}

// Probe iterations covering [point - window + 1, point] at the given stride,
// always including `point` itself.
std::vector<std::uint64_t> window_probes(std::uint64_t point,
                                         std::uint64_t window,
                                         std::uint64_t stride) {
  std::vector<std::uint64_t> out;
  const std::uint64_t from = point >= window ? point - window + 1 : 1;
  for (std::uint64_t k = from; k <= point; k += stride) out.push_back(k);
  if (out.empty() || out.back() != point) out.push_back(point);
  return out;
}

std::vector<ExperimentRecord> experiment_grad_vs_n(const KvConfig& cfg) {
  std::set<std::string> known = kSharedKeys;
  known.insert({"n_sweep", "series"});
  check_known_keys(cfg, known);

  const int dv = cfg.get_int("dv", 64);
  const int dh = cfg.get_int("dh", 16);
  const CorruptionModel model{cfg.get_double("zeta", 0.3)};
  const std::uint64_t base_seed = cfg.get_u64("seed", 1);
  const std::uint64_t seeds = cfg.get_u64("seeds", 5);
  const std::uint64_t window = cfg.get_u64("window", 100);
  const std::uint64_t stride = cfg.get_u64("probe_stride", 10);
  const std::uint64_t draws = cfg.get_u64("probe_draws", 2000);
  const bool det = cfg.get_bool("deterministic_timing", false);
  auto sweep = cfg.get_u64_list("n_sweep", "1000,10000,20000");
  std::sort(sweep.begin(), sweep.end());
  const std::uint64_t n_max = sweep.back();

  std::vector<double> series_values;
  if (cfg.has("series"))
    series_values = cfg.get_double_list("series", "");
  else
    series_values.push_back(default_series_value(cfg));

  std::vector<ExperimentRecord> records;
  for (const double sval : series_values) {
    const std::string series_label =
        cfg.get_string("schedule", "optimal") + "=" + format_double(sval);
    for (std::uint64_t s = 0; s < seeds; ++s) {
      const std::uint64_t run_seed = base_seed + s;
      const Dataset ds = build_dataset(cfg, run_seed, dv);
      const NetworkShape shape =
          ds.shape_for(dh, cfg.get_bool("bias_in_loss", true));
      const StepSchedule schedule =
          schedule_from_config(cfg, sval, n_max, shape);

      RsgOptions opts;
      GradNormPolicy policy;
      policy.draws = draws;
      for (const std::uint64_t point : sweep) {
        const auto probes = window_probes(point, window, stride);
        opts.probe.iterations.insert(opts.probe.iterations.end(),
                                     probes.begin(), probes.end());
      }
      std::sort(opts.probe.iterations.begin(), opts.probe.iterations.end());
      opts.probe.iterations.erase(std::unique(opts.probe.iterations.begin(),
                                              opts.probe.iterations.end()),
                                  opts.probe.iterations.end());
      opts.probe.estimator = [&](const Weights& w, std::uint64_t, Rng& rng) {
        return grad_norm_estimate(w, ds, model, policy, rng);
      };

      const auto t0 = Clock::now();
      const RSGRun run = rsg_run(ds, model, shape, schedule, n_max,
                                 StoppingRule::last(), run_seed, opts);
      const std::uint64_t elapsed = elapsed_ms_since(t0, det);

      for (const std::uint64_t point : sweep) {
        const std::uint64_t from = point >= window ? point - window + 1 : 1;
        double total = 0.0;
        std::size_t count = 0;
        for (const auto& [k, v] : run.probe_history) {
          if (k >= from && k <= point) {
            total += v;
            ++count;
          }
        }
        ExperimentRecord rec;
        rec.experiment = "grad_vs_N";
        rec.series = series_label;
        rec.x_name = "N";
        rec.x_value = static_cast<double>(point);
        rec.grad_raw = total / static_cast<double>(count);
        rec.seed = run_seed;
        rec.elapsed_ms = elapsed;
        records.push_back(std::move(rec));
      }
    }
  }
  normalize_records(records);
  return records;
}

std::vector<ExperimentRecord> experiment_grad_vs_shape(const KvConfig& cfg) {
  std::set<std::string> known = kSharedKeys;
  known.insert({"dv_sweep", "dh_sweep", "N"});
  check_known_keys(cfg, known);

  const CorruptionModel model{cfg.get_double("zeta", 0.3)};
  const std::uint64_t base_seed = cfg.get_u64("seed", 1);
  const std::uint64_t seeds = cfg.get_u64("seeds", 5);
  const std::uint64_t N = cfg.get_u64("N", 10000);
  const std::uint64_t window = cfg.get_u64("window", 100);
  const std::uint64_t stride = cfg.get_u64("probe_stride", 10);
  const std::uint64_t draws = cfg.get_u64("probe_draws", 2000);
  const bool det = cfg.get_bool("deterministic_timing", false);
  const auto dv_sweep = cfg.get_u64_list("dv_sweep", "16,32,64");
  const auto dh_sweep = cfg.get_u64_list("dh_sweep", "8");

  std::vector<ExperimentRecord> records;
  for (const std::uint64_t dh : dh_sweep) {
    for (const std::uint64_t dv : dv_sweep) {
      for (std::uint64_t s = 0; s < seeds; ++s) {
        const std::uint64_t run_seed = base_seed + s;
        const Dataset ds = build_dataset(cfg, run_seed, static_cast<int>(dv));
        const NetworkShape shape = ds.shape_for(
            static_cast<int>(dh), cfg.get_bool("bias_in_loss", true));
        const StepSchedule schedule = schedule_from_config(
            cfg, default_series_value(cfg), N, shape);

        RsgOptions opts;
        GradNormPolicy policy;
        policy.draws = draws;
        opts.probe.iterations = window_probes(N, window, stride);
        opts.probe.estimator = [&](const Weights& w, std::uint64_t, Rng& rng) {
          return grad_norm_estimate(w, ds, model, policy, rng);
        };

        const auto t0 = Clock::now();
        const RSGRun run = rsg_run(ds, model, shape, schedule, N,
                                   StoppingRule::last(), run_seed, opts);

        double total = 0.0;
        for (const auto& [k, v] : run.probe_history) total += v;

        ExperimentRecord rec;
        rec.experiment = "grad_vs_shape";
        rec.series = "dh=" + std::to_string(dh);
        rec.x_name = "d_v";
        rec.x_value = static_cast<double>(dv);
        rec.grad_raw = total / static_cast<double>(run.probe_history.size());
        rec.seed = run_seed;
        rec.elapsed_ms = elapsed_ms_since(t0, det);
        records.push_back(std::move(rec));
      }
    }
  }
  normalize_records(records);
  return records;
}

std::vector<ExperimentRecord> experiment_grad_vs_b(const KvConfig& cfg) {
  std::set<std::string> known = kSharedKeys;
  known.insert({"b_sweep", "budget", "meta", "warm", "grad_draws", "phi"});
  check_known_keys(cfg, known);

  const int dv = cfg.get_int("dv", 16);
  const int dh = cfg.get_int("dh", 8);
  const double zeta = cfg.get_double("zeta", 0.5);
  const std::uint64_t base_seed = cfg.get_u64("seed", 1);
  const std::uint64_t seeds = cfg.get_u64("seeds", 5);
  const std::uint64_t budget = cfg.get_u64("budget", 20000);
  const std::uint64_t meta = cfg.get_u64("meta", 1);
  const std::uint64_t warm = cfg.get_u64("warm", 200);
  const double phi = cfg.get_double("phi", 0.01);
  const bool det = cfg.get_bool("deterministic_timing", false);
  const auto b_sweep = cfg.get_u64_list("b_sweep", "1,2,4");

  GradNormPolicy policy;
  policy.draws = cfg.get_u64("grad_draws", 40000);
  const CorruptionModel parent_model{zeta};

  std::vector<ExperimentRecord> records;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const std::uint64_t run_seed = base_seed + s;
    KvConfig data_cfg = cfg;
    data_cfg.set_default("bias", "0");
    const Dataset ds = build_dataset(data_cfg, run_seed, dv);

    for (const std::uint64_t B : b_sweep) {
      if (B < 1) fail(ErrorCategory::config, "b_sweep entries must be >= 1");
      const double tau = 1.0 / static_cast<double>(B);
      PlanOptions po;
      po.clamp_q = true;  // the sweep crosses the q-feasibility boundary
      const NetworkShape shape =
          ds.shape_for(dh, cfg.get_bool("bias_in_loss", true));
      const SubDAPlan plan =
          plan_subdas(shape, zeta, tau, phi, PlanMode::disjoint_partition,
                      meta, run_seed, po);
      const std::uint64_t n_per =
          std::max<std::uint64_t>(1, budget / (plan.B * meta));
      NetworkShape block = shape;
      block.d_v = static_cast<int>(plan.subsets.front().size()) +
                  (shape.bias ? 1 : 0);
      const StepSchedule schedule = StepSchedule::constant_optimal(
          cfg.get_double("D", 1.0), n_per, block);

      DdaOptions dopts;
      dopts.warm_start = warm;
      const auto t0 = Clock::now();
      const DdaResult res =
          run_distributed(plan, ds, schedule, n_per, ExecutionMode::sequential,
                          run_seed, dopts);

      ExperimentRecord rec;
      rec.experiment = "grad_vs_B";
      rec.series = "B";
      rec.x_name = "B";
      rec.x_value = static_cast<double>(B);
      rec.grad_raw = grad_norm_estimate(res.w, ds, parent_model, policy,
                                        Rng(run_seed).split(7));
      rec.seed = run_seed;
      rec.elapsed_ms = elapsed_ms_since(t0, det);
      records.push_back(std::move(rec));
    }
  }
  normalize_records(records);
  return records;
}

std::vector<ExperimentRecord> experiment_speedup(const KvConfig& cfg) {
  std::set<std::string> known = kSharedKeys;
  known.insert({"b_sweep", "n_per", "meta"});
  check_known_keys(cfg, known);

  const int dv = cfg.get_int("dv", 512);
  const int dh = cfg.get_int("dh", 128);
  const double zeta = cfg.get_double("zeta", 0.3);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const bool det = cfg.get_bool("deterministic_timing", false);

  KvConfig data_cfg = cfg;
  data_cfg.set_default("bias", "0");
  data_cfg.set_default("n", "256");
  const Dataset ds = build_dataset(data_cfg, seed, dv);

  SpeedupOptions opts;
  opts.meta_iterations = cfg.get_u64("meta", 1);
  opts.D = cfg.get_double("D", 1.0);
  const auto points =
      measure_speedup(ds, dh, zeta, cfg.get_u64_list("b_sweep", "1,2,4"),
                      cfg.get_u64("n_per", 3000), seed, opts);

  std::vector<ExperimentRecord> records;
  for (const auto& pt : points) {
    ExperimentRecord rec;
    rec.experiment = "speedup";
    rec.series = "speedup";
    rec.x_name = "B";
    rec.x_value = static_cast<double>(pt.B);
    rec.grad_raw = pt.ratio;
    rec.seed = seed;
    rec.elapsed_ms =
        det ? 0 : static_cast<std::uint64_t>(std::llround(pt.wall_ms));
    records.push_back(std::move(rec));
  }
  normalize_records(records);
  return records;
}

Dataset take_rows(const Dataset& ds, std::uint64_t from, std::uint64_t to,
                  bool invert) {
  Dataset out;
  out.has_bias = ds.has_bias;
  const std::uint64_t n = ds.size();
  const std::uint64_t count = invert ? n - (to - from) : to - from;
  out.x.resize(static_cast<Eigen::Index>(count), ds.x.cols());
  Eigen::Index at = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const bool inside = i >= from && i < to;
    if (inside != invert) out.x.row(static_cast<Eigen::Index>(at++)) = ds.x.row(
        static_cast<Eigen::Index>(i));
  }
  return out;
}

// Held-out reconstruction error under the parent corruption, averaged over a
// fixed number of seeded corruption rounds.
double heldout_error(const Weights& w, const Dataset& test,
                     const CorruptionModel& model, std::uint64_t rounds,
                     Rng rng) {
  double total = 0.0;
  SamplePair pair;
  for (std::uint64_t r = 0; r < rounds; ++r) {
    for (std::uint64_t i = 0; i < test.size(); ++i) {
      corrupt_into(pair, test.instance(i), model, w.shape, rng);
      total += loss(w, pair);
    }
  }
  return total / static_cast<double>(rounds * test.size());
}

std::vector<ExperimentRecord> experiment_parity(const KvConfig& cfg) {
  std::set<std::string> known = kSharedKeys;
  known.insert({"b_list", "splits", "budget", "warm", "recon_rounds", "phi"});
  check_known_keys(cfg, known);

  const int dv = cfg.get_int("dv", 32);
  const int dh = cfg.get_int("dh", 8);
  const double zeta = cfg.get_double("zeta", 0.8);
  const std::uint64_t seed = cfg.get_u64("seed", 1);
  const std::uint64_t splits = cfg.get_u64("splits", 10);
  const std::uint64_t budget = cfg.get_u64("budget", 16000);
  const std::uint64_t warm = cfg.get_u64("warm", 200);
  const std::uint64_t rounds = cfg.get_u64("recon_rounds", 8);
  const double phi = cfg.get_double("phi", 0.01);
  const bool det = cfg.get_bool("deterministic_timing", false);
  const auto b_list = cfg.get_u64_list("b_list", "2,4");

  KvConfig data_cfg = cfg;
  data_cfg.set_default("bias", "0");
  data_cfg.set_default("n", "2000");
  const Dataset all = build_dataset(data_cfg, seed, dv);
  const CorruptionModel model{zeta};
  const std::uint64_t chunk = all.size() / splits;
  if (chunk == 0) fail(ErrorCategory::config, "dataset too small for splits");

  const auto train_arm = [&](std::uint64_t B, const Dataset& train,
                             std::uint64_t run_seed) {
    const double tau = 1.0 / static_cast<double>(B);
    PlanOptions po;
    po.clamp_q = true;
    const NetworkShape shape =
        train.shape_for(dh, cfg.get_bool("bias_in_loss", true));
    const SubDAPlan plan = plan_subdas(
        shape, zeta, tau, phi, PlanMode::disjoint_partition, 1, run_seed, po);
    const std::uint64_t n_per = std::max<std::uint64_t>(1, budget / plan.B);
    NetworkShape block = shape;
    block.d_v = static_cast<int>(plan.subsets.front().size()) +
                (shape.bias ? 1 : 0);
    const StepSchedule schedule =
        StepSchedule::constant_optimal(cfg.get_double("D", 1.0), n_per, block);
    DdaOptions dopts;
    dopts.warm_start = warm;
    return run_distributed(plan, train, schedule, n_per,
                           ExecutionMode::sequential, run_seed, dopts);
  };

  std::vector<ExperimentRecord> records;
  for (const std::uint64_t B : b_list) {
    if (B < 2)
      fail(ErrorCategory::config, "parity compares distributed runs, B >= 2");
    for (std::uint64_t split = 0; split < splits; ++split) {
      const std::uint64_t lo = split * chunk;
      const std::uint64_t hi = lo + chunk;
      const Dataset test = take_rows(all, lo, hi, false);
      const Dataset train = take_rows(all, lo, hi, true);
      const std::uint64_t run_seed = seed + 1000 + split;

      const auto t0 = Clock::now();
      const DdaResult dist = train_arm(B, train, run_seed);
      const DdaResult plain = train_arm(1, train, run_seed);
      Rng err_rng = Rng(seed).split(9).split(split);
      const double e_dist = heldout_error(dist.w, test, model, rounds,
                                          err_rng.split(0));
      const double e_plain = heldout_error(plain.w, test, model, rounds,
                                           err_rng.split(1));

      ExperimentRecord rec;
      rec.experiment = "generalization_parity";
      rec.series = "B=" + std::to_string(B);
      rec.x_name = "B";
      rec.x_value = static_cast<double>(B);
      rec.grad_raw = e_dist / e_plain;
      rec.seed = run_seed;
      rec.elapsed_ms = elapsed_ms_since(t0, det);
      records.push_back(std::move(rec));
    }
  }
  normalize_records(records);
  return records;
}

}  // namespace

std::vector<ExperimentRecord> run_experiment(const std::string& kind,
                                             KvConfig config,
                                             const std::string& out_dir) {
  std::vector<ExperimentRecord> records;
  if (kind == "grad_vs_N")
    records = experiment_grad_vs_n(config);
  else if (kind == "grad_vs_shape")
    records = experiment_grad_vs_shape(config);
  else if (kind == "grad_vs_B")
    records = experiment_grad_vs_b(config);
  else if (kind == "speedup")
    records = experiment_speedup(config);
  else if (kind == "generalization_parity")
    records = experiment_parity(config);
  else
    fail(ErrorCategory::config, "unknown experiment kind: " + kind);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCategory::io, out_dir + ": cannot create directory");

  write_csv(records, (fs::path(out_dir) / (kind + ".csv")).string());

  std::ofstream manifest(fs::path(out_dir) / "manifest.txt",
                         std::ios::binary | std::ios::trunc);
  if (!manifest) fail(ErrorCategory::io, out_dir + ": cannot write manifest");
  manifest << "kind=" << kind << '\n' << config.serialized();
  return records;
}

}  // namespace rsgda
