#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fasa/analysis.hpp"
#include "fasa/estimators.hpp"

namespace fasa::experiments {

enum class CampaignKind { Drift, Step, SingleEvent, Repetitive, StabilityScan };

/// "drift", "step", "single_event", "repetitive", "stability_scan".
std::string_view to_string(CampaignKind kind) noexcept;
std::optional<CampaignKind> parse_kind(std::string_view text) noexcept;

/// Invalid campaign document. what() starts with the JSON path of the
/// offending value, e.g. "$.schemes[1]: unknown scheme 'foo'".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RhoGridSpec {
  double start = 0.01;
  double stop = 6.0;
  double step = 0.01;
};

struct Campaign {
  std::string name;
  CampaignKind kind = CampaignKind::Step;
  std::vector<estimators::SchemeParams> schemes;
  std::uint64_t trials = 1;
  std::uint64_t base_seed = 0;
  std::string output_path;
  std::vector<std::string> deviations;

  // step, single_event
  std::vector<std::uint64_t> n;
  // step, repetitive
  std::uint64_t horizon = 0;
  // step
  std::vector<double> x_percents{10.0, 50.0, 90.0};
  std::uint64_t mean_trace_slots = 0;
  // single_event
  std::vector<double> y_percents{10.0, 50.0, 90.0};
  std::optional<std::uint64_t> max_slots;
  // repetitive, stability_scan
  std::vector<double> theta;
  std::vector<double> lambda_bar;
  std::optional<std::uint64_t> warmup;
  double warmup_fraction = 0.1;
  std::vector<std::uint64_t> horizons;
  std::optional<double> residual_limit;
  // drift
  RhoGridSpec rho_grid;
  // step, single_event, repetitive
  std::uint64_t trace_trials = 0;

  /// The document as parsed, re-serialized compactly.
  std::string config_echo;
};

/// Parses and validates a JSON campaign document. Unknown keys, missing
/// kind-specific fields, unparsable schemes and domain violations throw
/// ConfigError with a path-qualified message.
Campaign parse_campaign(std::string_view json_text);

/// One line of summary.csv.
struct ResultRow {
  std::string experiment;
  std::string scheme;
  std::string param;
  std::string metric;
  std::optional<double> value;
  double ci95 = 0.0;
  std::uint64_t trials = 0;
};

struct RunOptions {
  unsigned workers = 1;
  /// When set, summary.csv, manifest.json and kind-specific files are
  /// written here (created if missing).
  std::optional<std::filesystem::path> out_dir;
};

struct CampaignOutput {
  std::vector<ResultRow> rows;
  std::vector<analysis::DriftCurveRow> drift_curves;
  std::vector<std::string> files;  ///< written files, relative to out_dir
};

/// Runs every (scheme, parameter point) of the campaign. Trial i of every
/// scheme uses seed base_seed and trial index i; results are reduced in trial
/// order, so output is identical for any worker count.
CampaignOutput run_campaign(const Campaign& campaign, const RunOptions& options = {});

/// Header `experiment,scheme,param,metric,value,ci95,trials`.
void write_summary_csv(std::ostream& out, std::span<const ResultRow> rows);

/// Version plus source revision baked in at build time.
std::string build_fingerprint();

}  // namespace fasa::experiments
