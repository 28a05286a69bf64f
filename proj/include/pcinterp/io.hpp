#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pcinterp/minimax.hpp"
#include "pcinterp/simulate.hpp"

namespace pcinterp {

inline constexpr const char* kToolName = "pcinterp";
inline constexpr const char* kToolVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitHypothesis = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitVerifyMismatch = 5;

using Json = nlohmann::json;

// Every number in a report is a decimal string with 17 significant digits so
// golden files stay stable across platforms.
std::string format_number(double x);
double parse_number(const Json& j, const char* what);

std::uint64_t fnv1a64(const std::string& data);

DensitySpec density_from_json(const Json& j);
Json density_to_json(const DensitySpec& d);

MissingPattern pattern_from_json(const Json& j);
Json pattern_to_json(const MissingPattern& p);

enum class FunctionalMode { kVector, kPcLift, kPcBlock };

struct FunctionalSpec {
  FunctionalMode mode = FunctionalMode::kVector;
  ScalarCoeffs scalar;  // pc modes
  VectorCoeffs vector;  // vector mode
};

FunctionalSpec functional_from_json(const Json& j);

GeneratorSpec generator_from_json(const Json& j);

Quadrature quad_from_json(const Json& j);

struct RunOptions {
  std::optional<std::string> out_path;
  std::optional<int> grid_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> emit_filter_path;
};

// Dispatches a parsed config and returns the report. Throws the module error
// types on failure; exit-code mapping happens in run_config.
Json execute_command(const Json& config, const RunOptions& opts);

// Full CLI behavior: execute, write the report (file or stdout), emit the
// filter CSV when requested, map errors to exit codes with diagnostics on err.
int run_config(const Json& config, const RunOptions& opts, std::ostream& out,
               std::ostream& err);

}  // namespace pcinterp
