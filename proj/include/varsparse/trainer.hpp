#pragma once

// Minibatch training of the unmixing matrix.

#include "varsparse/adamw.hpp"
#include "varsparse/dataset.hpp"
#include "varsparse/losses.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace varsparse {

/// Learned linear map from m observations to d representation dimensions.
struct UnmixingModel {
  Matrix lhat;  ///< m x d
  std::uint64_t init_seed = 0;
  int epoch = 0;

  /// Entries i.i.d. U[-1/sqrt(m), 1/sqrt(m)].
  static UnmixingModel initialize(int m, int d, std::uint64_t seed);

  Matrix transform(const Matrix& observed) const;
};

struct TrainConfig {
  int epochs = 50;
  std::size_t batch_size = 4096;
  AdamWConfig optimizer;
  std::uint64_t seed = 0;
  bool gradient_check = true;
  /// Optimize in PCA-whitened coordinates of the pooled train observations;
  /// the returned lhat is mapped back to raw observation space.
  bool whiten = true;
  /// When positive, the count temperature decays geometrically per epoch
  /// from weights.count_temperature to this value at the last epoch; 0 keeps
  /// it fixed. A warm start avoids mixed minima, a cold finish removes the
  /// small cross terms the norm term otherwise leaves behind.
  double final_count_temperature = 3e-4;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  int steps = 0;
  LossBreakdown mean;  ///< averaged over the epoch's steps
};

struct GradientCheckRecord {
  bool performed = false;
  double relative_error = 0.0;  ///< ||g_fd - g|| / ||g|| on the first batch
  double step = 1e-5;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  Matrix final_variances;  ///< V on the full train split after the last step
  double wall_seconds = 0.0;
  long total_steps = 0;
  GradientCheckRecord gradient_check;

  nlohmann::json to_json() const;
  void write_csv(const std::string& path) const;
};

struct TrainResult {
  UnmixingModel model;
  TrainReport report;
};

/// m x d map to unit-covariance coordinates along the top d principal
/// directions of the pooled train observations.
Matrix whitening_matrix(const EnvDataset& data);

/// Each step draws one minibatch per environment from a per-epoch shuffle of
/// that environment's train rows; an epoch is ceil(n_train / batch_size)
/// steps. Deterministic given config.seed. Throws Precondition for fewer than
/// two environments or an oversized batch, Numerical on non-finite loss.
TrainResult train(const EnvDataset& data, const LossWeights& weights, const TrainConfig& config);

/// Central finite differences of the total loss; returns ||fd - analytic|| / ||analytic||.
double finite_difference_error(const std::vector<Matrix>& covariances, const Matrix& lhat, const LossWeights& w,
                               double h = 1e-5);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const UnmixingModel& model, const nlohmann::json& config, const std::string& path);
UnmixingModel load_model(const std::string& path, nlohmann::json* config = nullptr);

nlohmann::json to_json(const LossWeights& w);
nlohmann::json to_json(const TrainConfig& c);

}  // namespace varsparse
