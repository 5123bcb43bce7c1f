#include "varsparse/trainer.hpp"

#include "binary_io.hpp"
#include "varsparse/error.hpp"
#include "varsparse/rng.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace varsparse {

UnmixingModel UnmixingModel::initialize(int m, int d, std::uint64_t seed) {
  if (m < 1 || d < 1) fail(ErrorCode::InvalidArgument, "model dimensions must be positive");
  Engine engine(derive_seed(seed, Stream::Init));
  const double bound = 1.0 / std::sqrt(static_cast<double>(m));
  UnmixingModel model;
  model.lhat.resize(m, d);
  for (Eigen::Index i = 0; i < model.lhat.size(); ++i) model.lhat.data()[i] = uniform(engine, -bound, bound);
  model.init_seed = seed;
  return model;
}

Matrix UnmixingModel::transform(const Matrix& observed) const { return multiply(observed, lhat); }

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size < 2) fail(ErrorCode::InvalidArgument, "batch size must be >= 2");
  optimizer.validate();
  if (!(final_count_temperature >= 0.0) || !std::isfinite(final_count_temperature)) {
    fail(ErrorCode::InvalidArgument, "final count temperature must be finite and >= 0");
  }
}

double finite_difference_error(const std::vector<Matrix>& covariances, const Matrix& lhat, const LossWeights& w,
                               double h) {
  const Matrix analytic = evaluate_loss(covariances, lhat, w).gradient;
  Matrix fd(lhat.rows(), lhat.cols());
  Matrix probe = lhat;
  for (Eigen::Index i = 0; i < lhat.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = total_loss(variance_matrix(covariances, probe), probe, w).total;
    probe.data()[i] = orig - h;
    const double down = total_loss(variance_matrix(covariances, probe), probe, w).total;
    probe.data()[i] = orig;
    fd.data()[i] = (up - down) / (2.0 * h);
  }
  const double denom = std::max(analytic.norm(), 1e-12);
  return (fd - analytic).norm() / denom;
}

namespace {

void shuffle(std::vector<std::size_t>& idx, Engine& engine) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(engine() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Matrix gather_rows(const Matrix& source, const std::size_t* rows, std::size_t count) {
  Matrix out(static_cast<Eigen::Index>(count), source.cols());
  for (std::size_t r = 0; r < count; ++r) out.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

void accumulate(LossBreakdown& acc, const LossBreakdown& b) {
  acc.var += b.var;
  acc.env += b.env;
  acc.dim += b.dim;
  acc.diag += b.diag;
  acc.norm += b.norm;
  acc.total += b.total;
}

void scale(LossBreakdown& b, double f) {
  b.var *= f;
  b.env *= f;
  b.dim *= f;
  b.diag *= f;
  b.norm *= f;
  b.total *= f;
}

nlohmann::json breakdown_json(const LossBreakdown& b) {
  return {{"var", b.var}, {"env", b.env}, {"dim", b.dim}, {"diag", b.diag}, {"norm", b.norm}, {"total", b.total}};
}

}  // namespace

Matrix whitening_matrix(const EnvDataset& data) {
  const int d = data.d();
  const Matrix cov = batch_covariance(data.pooled_train_observed());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(cov), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Numerical, "eigendecomposition of the train covariance failed");
  const Eigen::Index m = cov.rows();
  // Eigenvalues ascend; keep the top d directions.
  const Eigen::VectorXd values = solver.eigenvalues().tail(d).reverse();
  const Eigen::MatrixXd vectors = solver.eigenvectors().rightCols(d).rowwise().reverse();
  if (!(values(d - 1) > 1e-12 * std::max(values(0), 1e-300))) {
    fail(ErrorCode::Numerical, "train covariance is rank deficient; cannot whiten");
  }
  Matrix w(m, d);
  w = vectors * values.cwiseSqrt().cwiseInverse().asDiagonal();
  return w;
}

namespace {

double epoch_temperature(double initial, const TrainConfig& config, int epoch) {
  if (!(config.final_count_temperature > 0.0) || config.epochs < 2) return initial;
  const double t = static_cast<double>(epoch - 1) / (config.epochs - 1);
  return initial * std::pow(config.final_count_temperature / initial, t);
}

}  // namespace

TrainResult train(const EnvDataset& data, const LossWeights& weights, const TrainConfig& config) {
  weights.validate();
  config.validate();
  if (data.num_envs() < 2) fail(ErrorCode::Precondition, "training needs at least two environments");
  const std::size_t n_train = data.n_train();
  if (n_train < 2) fail(ErrorCode::Precondition, "train split must hold at least two rows per environment");
  if (config.batch_size > n_train) {
    fail(ErrorCode::Precondition, "batch size " + std::to_string(config.batch_size) +
                                      " exceeds the train rows per environment (" + std::to_string(n_train) + ")");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t envs = data.num_envs();

  TrainResult result;
  const Matrix whitening = config.whiten ? whitening_matrix(data) : Matrix::Identity(data.m(), data.m());
  const auto to_working = [&](const Matrix& cov) -> Matrix {
    return config.whiten ? Matrix(whitening.transpose() * cov * whitening) : cov;
  };
  result.model = UnmixingModel::initialize(static_cast<int>(whitening.cols()), data.d(), config.seed);
  Matrix& lhat = result.model.lhat;
  AdamW optimizer(lhat.rows(), lhat.cols(), config.optimizer);
  Engine engine(derive_seed(config.seed, Stream::Batches));

  std::vector<std::vector<std::size_t>> order(envs, std::vector<std::size_t>(n_train));
  for (auto& o : order) std::iota(o.begin(), o.end(), std::size_t{0});
  const std::size_t steps_per_epoch = (n_train + config.batch_size - 1) / config.batch_size;
  std::vector<Matrix> covariances(envs);

  LossWeights current = weights;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    current.count_temperature = epoch_temperature(weights.count_temperature, config, epoch);
    for (auto& o : order) shuffle(o, engine);
    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t begin = s * config.batch_size;
      const std::size_t count = std::min(config.batch_size, n_train - begin);
      if (count < 2) continue;
      for (std::size_t e = 0; e < envs; ++e) {
        covariances[e] = to_working(batch_covariance(gather_rows(data.observed(e), order[e].data() + begin, count)));
      }
      if (config.gradient_check && !result.report.gradient_check.performed) {
        result.report.gradient_check.performed = true;
        result.report.gradient_check.relative_error =
            finite_difference_error(covariances, lhat, current, result.report.gradient_check.step);
      }
      const LossEvaluation eval = evaluate_loss(covariances, lhat, current);
      optimizer.step(lhat, eval.gradient);
      if (!lhat.allFinite()) fail(ErrorCode::Numerical, "parameters became non-finite at epoch " + std::to_string(epoch));
      accumulate(record.mean, eval.terms);
      ++record.steps;
    }
    if (record.steps > 0) scale(record.mean, 1.0 / record.steps);
    result.report.epochs.push_back(record);
    result.model.epoch = epoch;
  }

  for (std::size_t e = 0; e < envs; ++e) covariances[e] = to_working(batch_covariance(data.train_observed(e)));
  result.report.final_variances = variance_matrix(covariances, lhat);
  if (config.whiten) lhat = whitening * lhat;
  result.report.total_steps = optimizer.steps();
  result.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json epochs_json = nlohmann::json::array();
  for (const auto& r : epochs) {
    auto row = breakdown_json(r.mean);
    row["epoch"] = r.epoch;
    row["steps"] = r.steps;
    epochs_json.push_back(std::move(row));
  }
  nlohmann::json v = nlohmann::json::array();
  for (Eigen::Index i = 0; i < final_variances.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < final_variances.cols(); ++j) row.push_back(final_variances(i, j));
    v.push_back(std::move(row));
  }
  return {{"epochs", epochs_json},
          {"final_variances", v},
          {"wall_seconds", wall_seconds},
          {"total_steps", total_steps},
          {"gradient_check",
           {{"performed", gradient_check.performed},
            {"relative_error", gradient_check.relative_error},
            {"step", gradient_check.step}}}};
}

void TrainReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out.precision(17);
  out << "epoch,steps,var,env,dim,diag,norm,total\n";
  for (const auto& r : epochs) {
    out << r.epoch << ',' << r.steps << ',' << r.mean.var << ',' << r.mean.env << ',' << r.mean.dim << ','
        << r.mean.diag << ',' << r.mean.norm << ',' << r.mean.total << '\n';
  }
}

nlohmann::json to_json(const LossWeights& w) {
  return {{"lambda_e", w.lambda_e},       {"lambda_m", w.lambda_m},       {"lambda_diag", w.lambda_diag},
          {"lambda_norm", w.lambda_norm}, {"norm_target", w.norm_target}, {"count_temperature", w.count_temperature}};
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.optimizer.learning_rate},
          {"beta1", c.optimizer.beta1},
          {"beta2", c.optimizer.beta2},
          {"eps", c.optimizer.eps},
          {"weight_decay", c.optimizer.weight_decay},
          {"seed", c.seed},
          {"whiten", c.whiten},
          {"final_count_temperature", c.final_count_temperature}};
}

namespace {
constexpr char kModelMagic[8] = {'V', 'S', 'P', 'M', 'O', 'D', 'E', 'L'};
}

void save_model(const UnmixingModel& model, const nlohmann::json& config, const std::string& path) {
  nlohmann::json header{{"format", "varsparse-model"},
                        {"m", model.lhat.rows()},
                        {"d", model.lhat.cols()},
                        {"init_seed", model.init_seed},
                        {"epoch", model.epoch},
                        {"config", config}};
  const std::string text = header.dump();
  std::string buf(kModelMagic, sizeof kModelMagic);
  io::put_u32(buf, kModelFormatVersion);
  io::put_u64(buf, text.size());
  buf += text;
  io::put_matrix(buf, model.lhat);
  io::put_u32(buf, io::crc32(buf));
  io::write_file(path, buf);
}

UnmixingModel load_model(const std::string& path, nlohmann::json* config) {
  const std::string bytes = io::read_file(path);
  if (bytes.size() < sizeof kModelMagic + 16 || bytes.compare(0, sizeof kModelMagic, kModelMagic, sizeof kModelMagic) != 0) {
    fail(ErrorCode::Format, path + " is not a varsparse model checkpoint");
  }
  const std::string_view body = std::string_view(bytes).substr(0, bytes.size() - 4);
  io::Reader trailer(std::string_view(bytes).substr(bytes.size() - 4));
  io::Reader reader(body);
  reader.take(sizeof kModelMagic);
  if (const auto v = reader.u32(); v != kModelFormatVersion) {
    fail(ErrorCode::Format, "model format version " + std::to_string(v) + " unsupported");
  }
  if (trailer.u32() != io::crc32(body)) fail(ErrorCode::Checksum, path + " is corrupted");
  const auto len = reader.u64();
  try {
    const auto header = nlohmann::json::parse(reader.take(len));
    UnmixingModel model;
    const auto m = header.at("m").get<Eigen::Index>();
    const auto d = header.at("d").get<Eigen::Index>();
    if (reader.remaining() != static_cast<std::size_t>(m * d * 8)) fail(ErrorCode::Format, "model payload size mismatch");
    model.lhat = reader.matrix(m, d);
    model.init_seed = header.at("init_seed").get<std::uint64_t>();
    model.epoch = header.at("epoch").get<int>();
    if (config) *config = header.value("config", nlohmann::json::object());
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("model header malformed: ") + e.what());
  }
}

}  // namespace varsparse
