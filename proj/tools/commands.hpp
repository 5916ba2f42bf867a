#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracsphere/io.hpp"

namespace fracsphere::cli {

// Malformed flags or config; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unset numeric options are NaN or negative and take the subcommand's default.
struct RunOptions {
  std::string command;
  int n = 2;
  double sigma = 0.5;
  int lmax = -1;
  std::string grid;  // "polar x azimuthal", e.g. "128x256"
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int kmax = 64;
  double beta = -1.0;
  std::string k_preset;
  double eps = -1.0;
  double s = 0.9;
  double p = -1.0;
  double a = -1.0;
  int samples = -1;
  int subdivision = -1;
  std::string schedule;  // comma separated p values
  std::string t_list;    // comma separated t values
  std::string beta_list; // comma separated beta - 1 values
  std::string symmetry = "auto";
  std::string field;     // spectral snapshot path
  bool verify = false;
  Json models = Json::array();
  Json background;
  Json k_coeffs;
  Json poles;
  Json quad_c;
};

const std::vector<std::string>& command_names();

// Applies a config object; keys are the long flag names with '-' replaced by '_'.
// Unknown keys and wrong types raise ConfigError.
void apply_config(RunOptions& opt, const Json& config);

// Runs one subcommand, writing PASS/FAIL/INCONCLUSIVE lines to out and artifacts to
// opt.out (when set). Returns the exit status.
int run_command(const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace fracsphere::cli
