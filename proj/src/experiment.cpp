#include "varsparse/experiment.hpp"

#include "varsparse/error.hpp"
#include "varsparse/metrics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace varsparse {

std::string to_string(ScmKind kind) {
  switch (kind) {
    case ScmKind::Linear: return "linear";
    case ScmKind::Nonlinear1: return "nonlinear-1";
    case ScmKind::Nonlinear2: return "nonlinear-2";
  }
  return "?";
}

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::LeaveOneOut: return "leave-one-out";
    case DesignKind::Separating: return "separating";
    case DesignKind::CustomFile: return "custom-file";
  }
  return "?";
}

ScmKind parse_scm_kind(const std::string& text) {
  if (text == "linear") return ScmKind::Linear;
  if (text == "nonlinear-1") return ScmKind::Nonlinear1;
  if (text == "nonlinear-2") return ScmKind::Nonlinear2;
  fail(ErrorCode::InvalidArgument, "unknown scm '" + text + "' (linear, nonlinear-1, nonlinear-2)");
}

DesignKind parse_design_kind(const std::string& text) {
  if (text == "leave-one-out") return DesignKind::LeaveOneOut;
  if (text == "separating") return DesignKind::Separating;
  if (text == "custom-file") return DesignKind::CustomFile;
  fail(ErrorCode::InvalidArgument, "unknown design '" + text + "' (leave-one-out, separating, custom-file)");
}

void DataConfig::validate() const {
  if (d < 2) fail(ErrorCode::InvalidArgument, "d must be >= 2");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "p must lie in [0,1]");
  if (n_per_env < 2) fail(ErrorCode::InvalidArgument, "n must be >= 2");
  if (scm != ScmKind::Linear && d != 6) fail(ErrorCode::InvalidArgument, "the built-in nonlinear SCMs have d = 6");
  if (design == DesignKind::CustomFile && design_file.empty()) {
    fail(ErrorCode::InvalidArgument, "custom-file design requires a design file");
  }
}

nlohmann::json to_json(const DataConfig& c) {
  return {{"d", c.d},
          {"p", c.p},
          {"n_per_env", c.n_per_env},
          {"scm", to_string(c.scm)},
          {"design", to_string(c.design)},
          {"design_file", c.design_file},
          {"seed", c.seed},
          {"mixing_seed", c.mixing_seed}};
}

DataConfig data_config_from_json(const nlohmann::json& doc) {
  try {
    DataConfig c;
    c.d = doc.at("d").get<int>();
    c.p = doc.at("p").get<double>();
    c.n_per_env = doc.at("n_per_env").get<std::size_t>();
    c.scm = parse_scm_kind(doc.at("scm").get<std::string>());
    c.design = parse_design_kind(doc.at("design").get<std::string>());
    c.design_file = doc.value("design_file", std::string{});
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.mixing_seed = doc.at("mixing_seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, std::string("malformed data config: ") + e.what());
  }
}

namespace {

Scm build_scm(const DataConfig& c) {
  switch (c.scm) {
    case ScmKind::Linear: return sample_linear_scm(sample_er_dag(c.d, c.p, c.seed), c.seed);
    case ScmKind::Nonlinear1: return builtin_nonlinear_scm(1);
    case ScmKind::Nonlinear2: return builtin_nonlinear_scm(2);
  }
  fail(ErrorCode::InvalidArgument, "unknown scm kind");
}

EnvironmentSet build_design(const DataConfig& c) {
  switch (c.design) {
    case DesignKind::LeaveOneOut: return leave_one_out_design(c.d, c.seed);
    case DesignKind::Separating: return separating_design(c.d, c.seed);
    case DesignKind::CustomFile: {
      EnvironmentSet envs = load_environment_set(c.design_file);
      if (envs.d() != c.d) {
        fail(ErrorCode::InvalidArgument, "design file has d=" + std::to_string(envs.d()) + ", expected " + std::to_string(c.d));
      }
      return envs;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown design kind");
}

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

GeneratedData generate_from_config(const DataConfig& config) {
  config.validate();
  Scm scm = build_scm(config);
  EnvironmentSet envs = build_design(config);
  MixingMatrix mixing = sample_mixing(config.d, config.d, config.mixing_seed);

  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : scm.dag().edges()) edges.push_back({i, j});
  nlohmann::json manifest{{"config", to_json(config)},
                          {"edge_count", scm.dag().edge_count()},
                          {"edges", edges},
                          {"environments", to_json(envs)},
                          {"mixing", matrix_json(mixing.entries())},
                          {"mixing_condition_number", mixing.condition_number()},
                          {"n_train", train_rows_for(config.n_per_env)}};
  EnvDataset data = generate(scm, envs, mixing, config.n_per_env, config.seed, {{"config", to_json(config)}});
  return GeneratedData{std::move(scm), std::move(envs), std::move(mixing), std::move(data), std::move(manifest)};
}

Scm example_scm() {
  const DagAdjacency dag = DagAdjacency::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
  Matrix w = Matrix::Zero(3, 3);
  w(0, 1) = 1.0;
  w(0, 2) = 1.0;
  w(1, 2) = 1.0;
  return linear_scm(dag, w, std::vector<GaussianNoise>(3, GaussianNoise{0.0, 1.0}));
}

EnvironmentSet example_design() {
  return EnvironmentSet(3, {InterventionRegime({0, 1}, {1.0, 1.0}), InterventionRegime({0, 2}, {1.0, 2.0}),
                            InterventionRegime({1, 2}, {1.0, 3.0})});
}

MixingMatrix example_mixing() {
  Matrix l(3, 3);
  l << 1, 1, 1, 1, -1, 1, 1, 1, -1;
  return MixingMatrix::from_entries(l);
}

MccResult evaluate_unmixing(const EnvDataset& data, const Matrix& lhat) {
  const Matrix learned = multiply(data.pooled_test_observed(), lhat);
  return mcc(pearson(data.pooled_test_latents(), learned));
}

MccResult evaluate_fastica(const EnvDataset& data, const IcaConfig& config) {
  const IcaModel model = fit_fastica(data.pooled_train_observed(), data.d(), config);
  return mcc(pearson(data.pooled_test_latents(), transform(model, data.pooled_test_observed())));
}

std::vector<Setting> experiment_grid(const std::string& which, bool include_d30) {
  std::vector<Setting> grid;
  auto linear = [](int d, double p, std::size_t n) {
    DataConfig c;
    c.d = d;
    c.p = p;
    c.n_per_env = n;
    return c;
  };
  if (which == "fig2a") {
    std::vector<int> sizes{3, 6, 10};
    if (include_d30) sizes.push_back(30);
    for (int d : sizes) grid.push_back({"d=" + std::to_string(d), linear(d, 0.5, 100000)});
  } else if (which == "fig2b") {
    for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      std::ostringstream label;
      label << "p=" << p;
      grid.push_back({label.str(), linear(6, p, 100000)});
    }
  } else if (which == "fig2c") {
    for (std::size_t n : {std::size_t{10000}, std::size_t{50000}, std::size_t{100000}, std::size_t{200000}}) {
      grid.push_back({"n=" + std::to_string(n), linear(6, 0.5, n)});
    }
  } else if (which == "table1") {
    for (auto kind : {ScmKind::Nonlinear1, ScmKind::Nonlinear2}) {
      DataConfig c = linear(6, 0.75, 100000);
      c.scm = kind;
      grid.push_back({to_string(kind), c});
    }
  } else {
    fail(ErrorCode::InvalidArgument, "unknown experiment '" + which + "' (fig2a, fig2b, fig2c, table1)");
  }
  return grid;
}

std::vector<ResultRow> run_setting(const std::string& experiment, const Setting& setting, std::uint64_t seed,
                                   const ReproduceOptions& options) {
  DataConfig data_config = setting.data;
  data_config.seed = seed;
  data_config.mixing_seed = options.mixing_seed;

  auto base_row = [&](const std::string& method) {
    ResultRow row;
    row.experiment = experiment;
    row.setting = setting.label;
    row.d = data_config.d;
    row.p = data_config.p;
    row.n = data_config.n_per_env;
    row.scm = to_string(data_config.scm);
    row.seed = seed;
    row.method = method;
    return row;
  };

  std::vector<ResultRow> rows;
  std::optional<GeneratedData> generated;
  std::string data_error;
  try {
    generated.emplace(generate_from_config(data_config));
  } catch (const std::exception& e) {
    data_error = e.what();
  }
  for (const auto& method : options.methods) {
    ResultRow row = base_row(method);
    if (!generated) {
      row.status = "error: " + data_error;
      row.mcc = std::nan("");
      rows.push_back(row);
      continue;
    }
    try {
      if (method == "ours") {
        TrainConfig train_config = options.train;
        train_config.seed = seed;
        train_config.gradient_check = false;
        const TrainResult trained = train(generated->dataset, options.weights, train_config);
        row.mcc = evaluate_unmixing(generated->dataset, trained.model.lhat).score;
      } else if (method == "fastica") {
        IcaConfig ica = options.ica;
        ica.seed = seed;
        row.mcc = evaluate_fastica(generated->dataset, ica).score;
      } else {
        fail(ErrorCode::InvalidArgument, "unknown method '" + method + "' (ours, fastica)");
      }
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
      row.mcc = std::nan("");
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ResultRow> reproduce(const ReproduceOptions& options) {
  if (options.seeds.empty()) fail(ErrorCode::InvalidArgument, "at least one seed is required");
  std::vector<ResultRow> rows;
  for (const auto& setting : experiment_grid(options.which, options.include_d30)) {
    for (std::uint64_t seed : options.seeds) {
      for (auto& row : run_setting(options.which, setting, seed, options)) {
        if (options.on_row) options.on_row(row);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.experiment, r.setting, r.method);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      out.push_back(SummaryRow{r.experiment, r.setting, r.method});
      values.emplace_back();
    }
    if (r.status == "ok") {
      values[it->second].push_back(r.mcc);
    } else {
      ++out[it->second].failures;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    out[i].count = static_cast<int>(v.size());
    if (v.empty()) {
      out[i].mean = std::nan("");
      out[i].stderr_ = std::nan("");
      continue;
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].stderr_ = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size())) : 0.0;
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out.precision(10);
  out << "experiment,setting,d,p,n,scm,seed,method,mcc,status\n";
  for (const auto& r : rows) {
    out << r.experiment << ',' << csv_field(r.setting) << ',' << r.d << ',' << r.p << ',' << r.n << ',' << r.scm << ','
        << r.seed << ',' << r.method << ',' << r.mcc << ',' << csv_field(r.status) << '\n';
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  out.precision(10);
  out << "experiment,setting,method,mean_mcc,stderr,count,failures\n";
  for (const auto& r : rows) {
    out << r.experiment << ',' << csv_field(r.setting) << ',' << r.method << ',' << r.mean << ',' << r.stderr_ << ','
        << r.count << ',' << r.failures << '\n';
  }
}

nlohmann::json to_json(const ResultRow& row) {
  return {{"seed", row.seed}, {"d", row.d},           {"p", row.p},         {"n", row.n},
          {"mcc", row.mcc},   {"method", row.method}, {"scm", row.scm},     {"setting", row.setting},
          {"status", row.status}};
}

}  // namespace varsparse
