#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hjhom/cell.hpp"
#include "hjhom/effective.hpp"
#include "hjhom/environment.hpp"
#include "hjhom/kvconfig.hpp"
#include "hjhom/parabolic.hpp"

namespace hjhom::cli {

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode : int { ok = 0, usage_error = 1, pipeline_failure = 2, gate_failure = 3 };

// Command line flags; unset optionals leave the config file value in place.
struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> window;
  std::optional<int> threads;
  std::optional<double> tol_lambda;
  bool fresh = false;
  std::string out = "hjhom-out";
};

struct PipelineConfig {
  KeyValueConfig raw;  // with command line overrides applied
  EnvironmentSpec env;
  std::uint64_t seed = 0;
  Interval window;
  bool window_set = false;
  CellOptions cell;
  CurveOptions curve;
  std::vector<double> corrector_offsets;  // levels lambda0 + offset
  double corrector_dx = 1e-3;
  double hbar_theta_lo = -2.0, hbar_theta_hi = 2.0;
  std::size_t hbar_points = 401;
  SchemeConfig scheme;
  std::size_t scheme_periods = 1;
  std::vector<double> verify_thetas;
  double verify_tol = 0.05, verify_gap_tol = 0.02;
  std::vector<std::uint64_t> sweep_seeds;
  std::vector<double> sweep_offsets;
  std::vector<std::string> gates;
  int threads = 1;

  // Hash of the canonical config; keys stage checkpoints.
  std::uint64_t hash() const { return raw.hash(); }
};

// Rejects unknown keys by name; applies flags over file values.
PipelineConfig load_pipeline_config(const KeyValueConfig& cfg, const Options& opts);

// Verbs: validate, critical-value, corrector, curve, verify, sweep, emit, run.
int run_verb(const std::string& verb, const Options& opts, std::ostream& log);

// Pipeline stages for callers that hold a parsed config.
int run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out, bool fresh,
                 const std::vector<std::string>& stages, std::ostream& log);
int emit_plots_data(const std::filesystem::path& out, std::ostream& log);

// Reads theta.csv back into a curve.
EffectiveCurve load_curve_csv(const std::filesystem::path& theta_csv);

// Rewrites manifest.json listing every file under `out`.
void write_manifest(const PipelineConfig& cfg, const std::filesystem::path& out, const std::string& verb,
                    const std::string& started);

}  // namespace hjhom::cli
