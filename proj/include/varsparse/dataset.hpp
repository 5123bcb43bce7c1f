#pragma once

// Multi-environment datasets of linearly mixed latents, their train/test
// split and the on-disk container.

#include "varsparse/environment.hpp"
#include "varsparse/matrix.hpp"
#include "varsparse/scm.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace varsparse {

/// Injective linear map from d latents to m observations: observed = z * L.
class MixingMatrix {
 public:
  /// Validates rank d, condition number < 1e6 and, for square L, |det| > 1e-6.
  static MixingMatrix from_entries(Matrix entries);
  static MixingMatrix identity(int d);

  const Matrix& entries() const noexcept { return entries_; }
  int d() const noexcept { return static_cast<int>(entries_.rows()); }
  int m() const noexcept { return static_cast<int>(entries_.cols()); }
  double condition_number() const noexcept { return condition_; }

 private:
  MixingMatrix(Matrix entries, double condition) : entries_(std::move(entries)), condition_(condition) {}

  Matrix entries_;
  double condition_;
};

/// Entries i.i.d. U[-1, 1], redrawn until the invariants of MixingMatrix hold.
MixingMatrix sample_mixing(int d, int m, std::uint64_t seed);

/// Fraction of rows per environment used for training.
std::size_t train_rows_for(std::size_t n_per_env);

class EnvDataset {
 public:
  EnvDataset(EnvironmentSet envs, Matrix mixing, std::vector<Matrix> observed, std::vector<Matrix> latents,
             nlohmann::json meta = nlohmann::json::object());

  const EnvironmentSet& envs() const noexcept { return envs_; }
  const Matrix& mixing() const noexcept { return mixing_; }
  const nlohmann::json& meta() const noexcept { return meta_; }
  std::size_t num_envs() const noexcept { return observed_.size(); }
  int d() const noexcept { return envs_.d(); }
  int m() const noexcept { return static_cast<int>(mixing_.cols()); }
  std::size_t n_per_env() const noexcept { return n_per_env_; }
  std::size_t n_train() const noexcept { return n_train_; }
  std::size_t n_test() const noexcept { return n_per_env_ - n_train_; }

  const Matrix& observed(std::size_t e) const { return observed_.at(e); }
  /// Ground-truth latents; only used for evaluation.
  const Matrix& latents(std::size_t e) const { return latents_.at(e); }

  /// Rows [0, n_train) of every environment form the train split; the rest is held out.
  Matrix train_observed(std::size_t e) const;
  Matrix pooled_train_observed() const;
  Matrix pooled_test_observed() const;
  Matrix pooled_test_latents() const;

 private:
  EnvironmentSet envs_;
  Matrix mixing_;
  std::vector<Matrix> observed_;
  std::vector<Matrix> latents_;
  nlohmann::json meta_;
  std::size_t n_per_env_;
  std::size_t n_train_;
};

/// Latents under every regime, mixed by L, split 75/25 by row.
EnvDataset generate(const Scm& scm, const EnvironmentSet& envs, const MixingMatrix& mixing, std::size_t n_per_env,
                    std::uint64_t seed, nlohmann::json meta = nlohmann::json::object());

/// row-major product through the active kernel table
Matrix multiply(const Matrix& a, const Matrix& b);

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

void save_dataset(const EnvDataset& data, const std::string& path);
EnvDataset load_dataset(const std::string& path);

/// One CSV per environment (env_<e>.csv) with header z~1..z~m.
std::vector<std::string> export_csv(const EnvDataset& data, const std::string& directory);

}  // namespace varsparse
