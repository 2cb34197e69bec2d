#ifndef SPSAOI_TOOLS_EXPERIMENT_HPP
#define SPSAOI_TOOLS_EXPERIMENT_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kvconfig.hpp"
#include "spsaoi/analytic.hpp"
#include "spsaoi/config.hpp"

namespace spsaoi::tools {

enum class Mode { simulate, analytic, compare, validate, sweep, oracle };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

/// Everything one invocation needs: the base system configuration,
/// analytic truncations, sweep/validation grids and output policy.
struct ExperimentSpec {
  Mode mode = Mode::compare;
  SystemConfig base;
  int w_bar = 50;
  int b_bar = 1000;
  GeometricForm geometric_form = GeometricForm::normalized;

  std::optional<std::string> sweep_parameter;  // p_E | V | m
  std::vector<double> sweep_values;
  std::int64_t theta = 400;
  bool pool_nodes = false;
  bool dump_trace = false;

  std::vector<std::int64_t> validate_m_values{20, 50, 100, 200};
  double validate_load = 0.65;
  std::int64_t oracle_cap = -1;

  std::filesystem::path output_dir = "results";
  bool emit_csv = true;
  bool emit_json = true;
  int threads = 0;  // 0: hardware concurrency

  /// Builds a spec from parsed key=value configuration (file plus --set
  /// overrides already applied). Validates and throws on bad values.
  static ExperimentSpec from_kv(const KvConfig& kv);

  nlohmann::ordered_json echo() const;
};

/// Executes the experiment and writes its result bundle. Returns the
/// process exit code (0 on success).
int run_experiment(const ExperimentSpec& spec);

nlohmann::ordered_json pmf_to_json(const Pmf& pmf);
Pmf pmf_from_json(const nlohmann::json& j);

}  // namespace spsaoi::tools

#endif  // SPSAOI_TOOLS_EXPERIMENT_HPP
