#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace rsgda {

// Mean of the last min(window, size) entries.
double trailing_average(const std::vector<double>& history,
                        std::size_t window = 100);

// Flat key=value configuration. '#' starts a comment, blank lines ignored.
struct KvConfig {
  std::map<std::string, std::string> values;

  static KvConfig parse_text(const std::string& text);
  static KvConfig load_file(const std::string& path);

  bool has(const std::string& key) const { return values.count(key) > 0; }
  void set(const std::string& key, const std::string& value) {
    values[key] = value;
  }
  void set_default(const std::string& key, const std::string& value) {
    values.emplace(key, value);
  }

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  int get_int(const std::string& key, int def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::string& def) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                          const std::string& def) const;

  // Sorted key=value lines, one per entry.
  std::string serialized() const;
};

// One sweep-point measurement. grad_norm is grad_raw divided by the maximum
// raw value within the record's (series, seed) group, so each group peaks at
// exactly 1.
struct ExperimentRecord {
  std::string experiment;
  std::string series;
  std::string x_name;
  double x_value = 0.0;
  double grad_raw = 0.0;
  double grad_norm = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t elapsed_ms = 0;
};

// Schema: experiment,series,x_name,x_value,grad_raw,grad_norm,seed,elapsed_ms
// with a header line, '\n' terminated rows, period decimal separator.
void write_csv(const std::vector<ExperimentRecord>& records,
               const std::string& path);

extern const char* const kExperimentKinds[5];  // valid `kind` arguments

// Runs one experiment family, writes <out_dir>/<kind>.csv and
// <out_dir>/manifest.txt (the resolved configuration), and returns the rows.
std::vector<ExperimentRecord> run_experiment(const std::string& kind,
                                             KvConfig config,
                                             const std::string& out_dir);

}  // namespace rsgda
