#pragma once

#include "qham/covering.hpp"
#include "qham/finite_group.hpp"
#include "qham/loopdisc.hpp"
#include "qham/verify.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qham::cli {

enum ExitCode { kPass = 0, kFail = 1, kConfigError = 2, kGuard = 3 };

// Names the offending field, e.g. "construction.N: must be positive".
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GroupConfig {
  bool finite = false;
  std::optional<MatrixGroup> matrix;
  std::shared_ptr<FiniteGroup> table;
  std::vector<Perm> table_gamma_images;  // from the Cayley-table file
};

struct GammaConfig {
  int order = 1;
  Automorphism kappa;  // matrix groups
  Perm perm;           // finite groups (empty = identity)
};

struct RunConfig {
  nlohmann::json echo;  // the parsed input, echoed in reports
  GroupConfig group;
  std::optional<GammaConfig> gamma;
  std::string construction;
  nlohmann::json construction_json;
  std::vector<std::string> suites;  // sorted, unique
  SuiteOptions options;
  LoopOptions loop;
  std::optional<std::uint64_t> guard;
};

// Parse and validate; relative paths resolve against base_dir.
RunConfig parse_config(const nlohmann::json& j, const std::string& base_dir);
RunConfig load_config(const std::string& path);

// Suites accepted for a construction; everything else is a config error.
std::vector<std::string> allowed_suites(const RunConfig& c);

struct ReportBundle {
  nlohmann::json config;
  std::string construction;
  std::vector<VerificationReport> reports;  // sorted by check name
  bool pass = false;
};

// Runs the configured suites concurrently (QHAM_THREADS caps the worker
// count) and merges results in suite-name order.
ReportBundle run(const RunConfig& c, int threads);

nlohmann::json to_json(const ReportBundle& b);
std::string to_markdown(const ReportBundle& b);

struct EnumerationOutput {
  nlohmann::json json;
  std::string csv;
  bool bijection = false;
};
// Throws GuardExceeded when the assignment count exceeds the guard.
EnumerationOutput enumerate(const RunConfig& c);

// Worker count from QHAM_THREADS, else the hardware concurrency.
int thread_budget();

// Entry point of the qham tool.
int main_entry(int argc, char** argv);

}  // namespace qham::cli
