#pragma once

// Configuration intake and command implementations behind the diraclat tool.

#include "diraclat/model.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diraclat::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// A malformed or inconsistent configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };

struct RunConfig {
  std::string task;  ///< energy, free-energy, sum, heat-kernel or validate

  double g_over_a = 0.1;
  double b_over_a = 5.0;
  Vec2 c_over_a = Vec2::Zero();
  bool system_given = false;  ///< a "system" block was present in the file

  std::vector<double> b_sweep;   ///< empty: the single b_over_a
  std::vector<double> Ta_sweep;  ///< free-energy temperatures
  bool high_T_columns = false;   ///< add the n = 0 term and -(T/2) zeta'(0)

  Tolerances tol;

  std::vector<double> sum_xi{1.0};
  std::vector<Vec2> sum_q{Vec2::Zero()};

  std::vector<double> hk_t_grid{0.01, 0.02, 0.04, 0.08};
  double hk_g = 0.01;
  int hk_n_side = 1;
  double hk_volume = 1.0;

  Format format = Format::Csv;
  std::string output_path;  ///< empty: standard output
};

/// Parses a JSON document. Unknown keys, wrong types and invalid values throw ConfigError.
RunConfig parse_config(const std::string& json_text);

/// The fully resolved configuration as JSON, defaults included.
std::string config_to_json(const RunConfig& cfg);

/// Runs cfg.task and writes its table to `out`. `only` filters the validate checks.
/// Returns an exit code; numerical failures are reported on `log` as well.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& log, const std::string& only = "");

/// Command-line style entry point shared by the tool and the tests.
struct Invocation {
  std::string command;
  std::string config_path;  ///< empty: defaults
  std::optional<std::string> output_path;
  std::optional<std::string> format;
  int threads = 0;  ///< 0: keep the current cap
  std::string only;
};

int run(const Invocation& inv, std::ostream& out, std::ostream& log);

const char* version();

}  // namespace diraclat::app
