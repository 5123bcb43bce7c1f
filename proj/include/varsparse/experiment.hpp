#pragma once

// Experiment plumbing shared by the CLI and the acceptance suite: data
// configuration and manifests, single runs of both methods, and the
// reproduction grids.

#include "varsparse/dataset.hpp"
#include "varsparse/fastica.hpp"
#include "varsparse/losses.hpp"
#include "varsparse/metrics.hpp"
#include "varsparse/trainer.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace varsparse {

enum class ScmKind { Linear, Nonlinear1, Nonlinear2 };
enum class DesignKind { LeaveOneOut, Separating, CustomFile };

std::string to_string(ScmKind kind);
std::string to_string(DesignKind kind);
ScmKind parse_scm_kind(const std::string& text);
DesignKind parse_design_kind(const std::string& text);

/// Everything needed to regenerate a dataset bit for bit.
struct DataConfig {
  int d = 6;
  double p = 0.5;
  std::size_t n_per_env = 100000;
  ScmKind scm = ScmKind::Linear;
  DesignKind design = DesignKind::LeaveOneOut;
  std::string design_file;
  /// Drives the DAG, coefficients, intervention constants and samples.
  std::uint64_t seed = 0;
  /// The mixing matrix is shared across seeds of an experiment.
  std::uint64_t mixing_seed = 0;

  void validate() const;
};

struct GeneratedData {
  Scm scm;
  EnvironmentSet envs;
  MixingMatrix mixing;
  EnvDataset dataset;
  nlohmann::json manifest;
};

GeneratedData generate_from_config(const DataConfig& config);

nlohmann::json to_json(const DataConfig& config);
DataConfig data_config_from_json(const nlohmann::json& doc);

/// Three-node chain Z1 -> Z2 -> Z3 plus Z1 -> Z3 with unit weights and unit
/// noise variance, its three two-target interventions, and the dense mixing
/// [[1,1,1],[1,-1,1],[1,1,-1]].
Scm example_scm();
EnvironmentSet example_design();
MixingMatrix example_mixing();

/// MCC of a learned unmixing on the pooled held-out rows.
MccResult evaluate_unmixing(const EnvDataset& data, const Matrix& lhat);

/// FastICA fitted on the pooled train rows, scored on the pooled test rows.
MccResult evaluate_fastica(const EnvDataset& data, const IcaConfig& config);

struct ResultRow {
  std::string experiment;
  std::string setting;
  int d = 0;
  double p = 0.0;
  std::size_t n = 0;
  std::string scm;
  std::uint64_t seed = 0;
  std::string method;
  double mcc = 0.0;
  std::string status = "ok";
};

struct SummaryRow {
  std::string experiment;
  std::string setting;
  std::string method;
  double mean = 0.0;
  double stderr_ = 0.0;  ///< sample std over seeds / sqrt(count)
  int count = 0;
  int failures = 0;
};

struct Setting {
  std::string label;
  DataConfig data;
};

/// The grid behind one figure or table. Known names: fig2a, fig2b, fig2c, table1.
std::vector<Setting> experiment_grid(const std::string& which, bool include_d30 = false);

struct ReproduceOptions {
  std::string which;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<std::string> methods{"ours", "fastica"};
  LossWeights weights;
  TrainConfig train;
  IcaConfig ica;
  std::uint64_t mixing_seed = 0;
  bool include_d30 = false;
  std::function<void(const ResultRow&)> on_row;
};

/// Runs every (setting, seed, method); a failing run is recorded with its
/// status and the grid continues. Rows come back in (setting, seed, method) order.
std::vector<ResultRow> reproduce(const ReproduceOptions& options);

/// Runs one setting for one seed and the requested methods.
std::vector<ResultRow> run_setting(const std::string& experiment, const Setting& setting, std::uint64_t seed,
                                   const ReproduceOptions& options);

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
nlohmann::json to_json(const ResultRow& row);

}  // namespace varsparse
