#include "varsparse/dataset.hpp"

#include "binary_io.hpp"
#include "varsparse/error.hpp"
#include "varsparse/kernels.hpp"
#include "varsparse/rng.hpp"

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace varsparse {

namespace io {

std::uint32_t crc32(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t len = std::min(kChunk, bytes.size() - off);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + off), static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "read failed for " + path);
  return std::move(ss).str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

}  // namespace io

namespace {

constexpr int kMixingRetries = 100;
constexpr double kMaxCondition = 1e6;
constexpr double kMinAbsDet = 1e-6;
constexpr char kMagic[8] = {'V', 'S', 'P', 'D', 'A', 'T', 'A', '\0'};

std::string validate_mixing(const Matrix& entries, double& condition) {
  if (entries.rows() < 1 || entries.cols() < entries.rows()) return "mixing must be d x m with m >= d >= 1";
  if (!entries.allFinite()) return "mixing has non-finite entries";
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(entries);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return "mixing is rank deficient";
  condition = smax / smin;
  if (!(condition < kMaxCondition)) return "mixing condition number " + std::to_string(condition) + " too large";
  if (entries.rows() == entries.cols() && !(std::abs(entries.determinant()) > kMinAbsDet)) {
    return "mixing determinant too close to zero";
  }
  return {};
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix stack_rows(const std::vector<Matrix>& blocks, std::size_t begin, std::size_t end) {
  if (blocks.empty()) return {};
  const auto cols = blocks.front().cols();
  const auto per = static_cast<Eigen::Index>(end - begin);
  Matrix out(per * static_cast<Eigen::Index>(blocks.size()), cols);
  for (std::size_t e = 0; e < blocks.size(); ++e) {
    out.middleRows(static_cast<Eigen::Index>(e) * per, per) =
        blocks[e].middleRows(static_cast<Eigen::Index>(begin), per);
  }
  return out;
}

}  // namespace

MixingMatrix MixingMatrix::from_entries(Matrix entries) {
  double condition = 0.0;
  if (auto why = validate_mixing(entries, condition); !why.empty()) fail(ErrorCode::InvalidArgument, why);
  return MixingMatrix(std::move(entries), condition);
}

MixingMatrix MixingMatrix::identity(int d) { return from_entries(Matrix::Identity(d, d)); }

MixingMatrix sample_mixing(int d, int m, std::uint64_t seed) {
  if (d < 1 || m < d) fail(ErrorCode::InvalidArgument, "sample_mixing needs m >= d >= 1");
  Engine engine(derive_seed(seed, Stream::Mixing));
  for (int attempt = 0; attempt < kMixingRetries; ++attempt) {
    Matrix entries(d, m);
    for (Eigen::Index i = 0; i < entries.size(); ++i) entries.data()[i] = uniform(engine, -1.0, 1.0);
    double condition = 0.0;
    if (validate_mixing(entries, condition).empty()) return MixingMatrix::from_entries(std::move(entries));
  }
  fail(ErrorCode::RetryExhausted, "no admissible mixing matrix after " + std::to_string(kMixingRetries) +
                                      " draws (seed " + std::to_string(seed) + ")");
}

std::size_t train_rows_for(std::size_t n_per_env) { return (n_per_env * 3) / 4; }

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorCode::InvalidArgument, "matrix product dimension mismatch");
  Matrix c(a.rows(), b.cols());
  kernels::active().matmul(a.data(), static_cast<std::size_t>(a.rows()), static_cast<std::size_t>(a.cols()), b.data(),
                           static_cast<std::size_t>(b.cols()), c.data());
  return c;
}

EnvDataset::EnvDataset(EnvironmentSet envs, Matrix mixing, std::vector<Matrix> observed, std::vector<Matrix> latents,
                       nlohmann::json meta)
    : envs_(std::move(envs)),
      mixing_(std::move(mixing)),
      observed_(std::move(observed)),
      latents_(std::move(latents)),
      meta_(std::move(meta)) {
  if (observed_.size() != envs_.size() || latents_.size() != envs_.size()) {
    fail(ErrorCode::InvalidArgument, "dataset needs one observed and one latent matrix per environment");
  }
  if (mixing_.rows() != envs_.d()) fail(ErrorCode::InvalidArgument, "mixing rows must equal latent dimension");
  n_per_env_ = observed_.empty() ? 0 : static_cast<std::size_t>(observed_.front().rows());
  for (std::size_t e = 0; e < observed_.size(); ++e) {
    if (static_cast<std::size_t>(observed_[e].rows()) != n_per_env_ ||
        static_cast<std::size_t>(latents_[e].rows()) != n_per_env_ || observed_[e].cols() != mixing_.cols() ||
        latents_[e].cols() != envs_.d()) {
      fail(ErrorCode::InvalidArgument, "environment " + std::to_string(e) + " has inconsistent shape");
    }
  }
  n_train_ = train_rows_for(n_per_env_);
}

Matrix EnvDataset::train_observed(std::size_t e) const {
  return observed_.at(e).topRows(static_cast<Eigen::Index>(n_train_));
}

Matrix EnvDataset::pooled_train_observed() const { return stack_rows(observed_, 0, n_train_); }
Matrix EnvDataset::pooled_test_observed() const { return stack_rows(observed_, n_train_, n_per_env_); }
Matrix EnvDataset::pooled_test_latents() const { return stack_rows(latents_, n_train_, n_per_env_); }

EnvDataset generate(const Scm& scm, const EnvironmentSet& envs, const MixingMatrix& mixing, std::size_t n_per_env,
                    std::uint64_t seed, nlohmann::json meta) {
  if (scm.d() != envs.d() || mixing.d() != scm.d()) {
    fail(ErrorCode::InvalidArgument, "dimension mismatch: scm d=" + std::to_string(scm.d()) + ", environments d=" +
                                         std::to_string(envs.d()) + ", mixing rows=" + std::to_string(mixing.d()));
  }
  if (n_per_env < 1) fail(ErrorCode::InvalidArgument, "n_per_env must be >= 1");
  std::vector<Matrix> observed;
  std::vector<Matrix> latents;
  for (std::size_t e = 0; e < envs.size(); ++e) {
    Matrix z = sample(scm, n_per_env, envs.regime(e), derive_seed(seed, e + 1));
    observed.push_back(multiply(z, mixing.entries()));
    latents.push_back(std::move(z));
  }
  return EnvDataset(envs, mixing.entries(), std::move(observed), std::move(latents), std::move(meta));
}

void save_dataset(const EnvDataset& data, const std::string& path) {
  nlohmann::json header{{"format", "varsparse-dataset"},
                        {"d", data.d()},
                        {"m", data.m()},
                        {"n_per_env", data.n_per_env()},
                        {"n_train", data.n_train()},
                        {"environments", to_json(data.envs())},
                        {"mixing", matrix_to_json(data.mixing())},
                        {"meta", data.meta()}};
  const std::string header_text = header.dump();
  std::string buf(kMagic, sizeof kMagic);
  io::put_u32(buf, kDatasetFormatVersion);
  io::put_u64(buf, header_text.size());
  buf += header_text;
  for (std::size_t e = 0; e < data.num_envs(); ++e) {
    io::put_matrix(buf, data.observed(e));
    io::put_matrix(buf, data.latents(e));
  }
  io::put_u32(buf, io::crc32(buf));
  io::write_file(path, buf);
}

EnvDataset load_dataset(const std::string& path) {
  const std::string bytes = io::read_file(path);
  if (bytes.size() < sizeof kMagic + 4 + 8 + 4 || bytes.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::Format, path + " is not a varsparse dataset");
  }
  io::Reader reader(std::string_view(bytes).substr(0, bytes.size() - 4));
  reader.take(sizeof kMagic);
  const std::uint32_t version = reader.u32();
  if (version != kDatasetFormatVersion) {
    fail(ErrorCode::Format, "dataset format version " + std::to_string(version) + " unsupported (expected " +
                                std::to_string(kDatasetFormatVersion) + ")");
  }
  io::Reader trailer(std::string_view(bytes).substr(bytes.size() - 4));
  if (trailer.u32() != io::crc32(std::string_view(bytes).substr(0, bytes.size() - 4))) {
    fail(ErrorCode::Checksum, path + " is corrupted");
  }
  const std::uint64_t header_len = reader.u64();
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(reader.take(header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("dataset header is not JSON: ") + e.what());
  }
  try {
    const int d = header.at("d").get<int>();
    const int m = header.at("m").get<int>();
    const auto n = header.at("n_per_env").get<std::size_t>();
    EnvironmentSet envs = environment_set_from_json(header.at("environments"));
    if (envs.d() != d) {
      fail(ErrorCode::Format, "header d=" + std::to_string(d) + " but environments declare d=" + std::to_string(envs.d()));
    }
    const auto& mix_rows = header.at("mixing");
    Matrix mixing(d, m);
    if (mix_rows.size() != static_cast<std::size_t>(d)) fail(ErrorCode::Format, "mixing rows do not match header d");
    for (int r = 0; r < d; ++r) {
      if (mix_rows[r].size() != static_cast<std::size_t>(m)) fail(ErrorCode::Format, "mixing columns do not match header m");
      for (int c = 0; c < m; ++c) mixing(r, c) = mix_rows[r][c].get<double>();
    }
    const std::size_t expected = envs.size() * n * static_cast<std::size_t>(m + d) * 8;
    if (reader.remaining() != expected) fail(ErrorCode::Format, "payload size does not match header dimensions");
    std::vector<Matrix> observed;
    std::vector<Matrix> latents;
    for (std::size_t e = 0; e < envs.size(); ++e) {
      observed.push_back(reader.matrix(static_cast<Eigen::Index>(n), m));
      latents.push_back(reader.matrix(static_cast<Eigen::Index>(n), d));
    }
    return EnvDataset(std::move(envs), std::move(mixing), std::move(observed), std::move(latents),
                      header.value("meta", nlohmann::json::object()));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("dataset header malformed: ") + e.what());
  }
}

std::vector<std::string> export_csv(const EnvDataset& data, const std::string& directory) {
  std::filesystem::create_directories(directory);
  std::vector<std::string> paths;
  for (std::size_t e = 0; e < data.num_envs(); ++e) {
    const auto path = (std::filesystem::path(directory) / ("env_" + std::to_string(e) + ".csv")).string();
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path);
    for (int c = 0; c < data.m(); ++c) out << (c ? "," : "") << "z~" << (c + 1);
    out << '\n' << std::setprecision(17);
    const Matrix& x = data.observed(e);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) out << (c ? "," : "") << x(r, c);
      out << '\n';
    }
    paths.push_back(path);
  }
  return paths;
}

}  // namespace varsparse
