// Command-line front end: generate, check-design, train, evaluate, reproduce.
// Exit codes: 0 success, 1 validation or usage failure, 2 numerical abort.

#include "varsparse/error.hpp"
#include "varsparse/experiment.hpp"
#include "varsparse/kernels.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace varsparse;

namespace {

struct DataFlags {
  int d = 6;
  double p = 0.5;
  std::size_t n = 100000;
  std::string scm = "linear";
  std::string design = "leave-one-out";
  std::string design_file;
  std::uint64_t seed = 0;
  std::uint64_t mixing_seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--d", d, "latent dimension")->capture_default_str();
    cmd->add_option("--p", p, "edge probability of the random DAG")->capture_default_str();
    cmd->add_option("--n", n, "samples per environment")->capture_default_str();
    cmd->add_option("--scm", scm, "linear | nonlinear-1 | nonlinear-2")->capture_default_str();
    cmd->add_option("--design", design, "leave-one-out | separating | custom-file, or a path to a design JSON")
        ->capture_default_str();
    cmd->add_option("--seed", seed, "seed for graph, coefficients, design and samples")->capture_default_str();
    cmd->add_option("--mixing-seed", mixing_seed, "seed for the mixing matrix")->capture_default_str();
  }

  DataConfig to_config() const {
    DataConfig c;
    c.d = d;
    c.p = p;
    c.n_per_env = n;
    c.scm = parse_scm_kind(scm);
    if (design == "leave-one-out" || design == "separating") {
      c.design = parse_design_kind(design);
    } else {
      c.design = DesignKind::CustomFile;
      c.design_file = design == "custom-file" ? design_file : design;
      if (!fs::exists(c.design_file)) fail(ErrorCode::InvalidArgument, "design file not found: " + c.design_file);
    }
    c.seed = seed;
    c.mixing_seed = mixing_seed;
    return c;
  }
};

struct TrainFlags {
  LossWeights weights;
  TrainConfig train;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--epochs", train.epochs)->capture_default_str();
    cmd->add_option("--batch-size", train.batch_size)->capture_default_str();
    cmd->add_option("--lr", train.optimizer.learning_rate)->capture_default_str();
    cmd->add_option("--weight-decay", train.optimizer.weight_decay)->capture_default_str();
    cmd->add_option("--lambda-e", weights.lambda_e)->capture_default_str();
    cmd->add_option("--lambda-m", weights.lambda_m)->capture_default_str();
    cmd->add_option("--lambda-diag", weights.lambda_diag)->capture_default_str();
    cmd->add_option("--lambda-norm", weights.lambda_norm)->capture_default_str();
    cmd->add_option("--norm-target", weights.norm_target)->capture_default_str();
    cmd->add_option("--count-temperature", weights.count_temperature, "starting temperature of the count terms")
        ->capture_default_str();
    cmd->add_option("--final-count-temperature", train.final_count_temperature, "temperature at the last epoch, 0 = fixed")
        ->capture_default_str();
    cmd->add_flag("!--no-whiten", train.whiten, "optimize on raw observations instead of whitened ones");
  }
};

void write_json(const nlohmann::json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

fs::path ensure_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out + ": " + ec.message());
  return dir;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

int cmd_generate(const DataFlags& flags, const std::string& manifest_in, const std::string& out, bool csv) {
  const DataConfig config = manifest_in.empty() ? flags.to_config()
                                                : data_config_from_json(read_json(manifest_in).at("config"));
  GeneratedData generated = generate_from_config(config);
  const fs::path dir = ensure_dir(out);
  save_dataset(generated.dataset, (dir / "dataset.vsds").string());
  write_json(generated.manifest, dir / "manifest.json");
  if (csv) export_csv(generated.dataset, dir.string());
  std::cout << "wrote " << generated.dataset.num_envs() << " environments x " << config.n_per_env
            << " rows to " << dir.string() << " (" << generated.manifest["edge_count"] << " edges)\n";
  return 0;
}

int cmd_check_design(const DataFlags& flags, const std::string& out) {
  const DataConfig config = flags.to_config();
  EnvironmentSet envs = config.design == DesignKind::CustomFile ? load_environment_set(config.design_file)
                        : config.design == DesignKind::Separating ? separating_design(config.d, config.seed)
                                                                   : leave_one_out_design(config.d, config.seed);
  const CoverageReport report = check_sufficient_coverage(envs);
  nlohmann::json doc{{"d", envs.d()}, {"environments", envs.size()}, {"passed", report.passed}};
  nlohmann::json violations = nlohmann::json::array();
  for (const auto& v : report.violations) violations.push_back({{"node", v.node}, {"missing", v.missing}});
  doc["violations"] = violations;
  if (!out.empty()) write_json(doc, out);
  std::cout << report.describe() << '\n';
  return report.passed ? 0 : 1;
}

int cmd_train(TrainFlags flags, const std::string& data_path, const std::string& out, std::uint64_t seed) {
  const EnvDataset data = load_dataset(data_path);
  flags.train.seed = seed;
  const fs::path dir = ensure_dir(out);
  TrainResult result;
  try {
    result = train(data, flags.weights, flags.train);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Numerical) write_json({{"status", "numerical abort"}, {"error", e.what()}}, dir / "report.json");
    throw;
  }
  const MccResult score = evaluate_unmixing(data, result.model.lhat);
  nlohmann::json config{{"weights", to_json(flags.weights)}, {"train", to_json(flags.train)}, {"dataset", data_path}};
  save_model(result.model, config, (dir / "model.vsm").string());
  nlohmann::json report = result.report.to_json();
  report["test_mcc"] = score.score;
  report["config"] = config;
  write_json(report, dir / "report.json");
  result.report.write_csv((dir / "loss.csv").string());
  std::cout << "test MCC " << score.score << " after " << result.report.total_steps << " steps ("
            << result.report.wall_seconds << " s)\n";
  return 0;
}

int cmd_evaluate(const std::string& data_path, const std::string& model_path, const std::string& method,
                 std::uint64_t seed, const std::string& out) {
  const EnvDataset data = load_dataset(data_path);
  MccResult score;
  if (method == "ours") {
    if (model_path.empty()) fail(ErrorCode::InvalidArgument, "--model is required for method ours");
    const UnmixingModel model = load_model(model_path);
    if (model.lhat.rows() != data.m() || model.lhat.cols() != data.d()) {
      fail(ErrorCode::Format, "model shape does not match the dataset");
    }
    score = evaluate_unmixing(data, model.lhat);
  } else if (method == "fastica") {
    IcaConfig ica;
    ica.seed = seed;
    score = evaluate_fastica(data, ica);
  } else {
    fail(ErrorCode::InvalidArgument, "unknown method '" + method + "' (ours, fastica)");
  }
  nlohmann::json doc{{"method", method}, {"mcc", score.score}, {"assignment", score.assignment}, {"abs_corr", score.pair_abs}};
  if (!out.empty()) write_json(doc, out);
  std::cout << doc.dump() << '\n';
  return 0;
}

int cmd_reproduce(const std::string& which, const TrainFlags& flags, const std::string& seeds,
                  const std::string& methods, std::uint64_t mixing_seed, bool include_d30, const std::string& out) {
  ReproduceOptions options;
  options.which = which;
  options.seeds.clear();
  for (const auto& s : split_list(seeds)) {
    try {
      options.seeds.push_back(std::stoull(s));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad seed '" + s + "'");
    }
  }
  options.methods = split_list(methods);
  options.weights = flags.weights;
  options.train = flags.train;
  options.mixing_seed = mixing_seed;
  options.include_d30 = include_d30;
  options.on_row = [](const ResultRow& row) {
    std::cerr << row.setting << " seed=" << row.seed << " " << row.method << " mcc=" << row.mcc
              << (row.status == "ok" ? "" : " [" + row.status + "]") << '\n';
  };
  const fs::path dir = ensure_dir(out);
  const auto rows = reproduce(options);
  const auto summary = summarize(rows);
  write_results_csv(rows, (dir / (which + ".csv")).string());
  write_summary_csv(summary, (dir / (which + "_summary.csv")).string());
  for (const auto& s : summary) {
    std::cout << s.setting << ' ' << s.method << " mean=" << s.mean << " stderr=" << s.stderr_ << " n=" << s.count
              << (s.failures ? " failures=" + std::to_string(s.failures) : "") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disentangle linearly mixed causal variables from multi-node interventional data"};
  app.set_config("--config", "", "INI-style config file; command-line flags take precedence");
  app.require_subcommand(1);
  std::string kernels;
  app.add_option("--kernels", kernels, "scalar | avx2 | neon | auto (default: VARSPARSE_KERNELS or auto)");

  DataFlags gen_flags;
  std::string gen_out = "data", manifest_in;
  bool no_csv = false;
  auto* gen = app.add_subcommand("generate", "sample a multi-environment dataset");
  gen_flags.add_to(gen);
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();
  gen->add_option("--from-manifest", manifest_in, "regenerate exactly from a manifest.json");
  gen->add_flag("--no-csv", no_csv, "skip per-environment CSV export");

  DataFlags design_flags;
  std::string design_out;
  auto* check = app.add_subcommand("check-design", "check intervention coverage of a design");
  design_flags.add_to(check);
  check->add_option("--out", design_out, "write the report as JSON");

  TrainFlags train_flags;
  std::string train_data, train_out = "run";
  std::uint64_t train_seed = 0;
  auto* trn = app.add_subcommand("train", "fit an unmixing matrix");
  train_flags.add_to(trn);
  trn->add_option("--data", train_data, "dataset.vsds produced by generate")->required();
  trn->add_option("--out", train_out, "output directory")->capture_default_str();
  trn->add_option("--seed", train_seed, "initialization and minibatch seed")->capture_default_str();

  std::string eval_data, eval_model, eval_method = "ours", eval_out;
  std::uint64_t eval_seed = 0;
  auto* evl = app.add_subcommand("evaluate", "score a model or the FastICA baseline on the test split");
  evl->add_option("--data", eval_data, "dataset.vsds")->required();
  evl->add_option("--model", eval_model, "model.vsm produced by train");
  evl->add_option("--method", eval_method, "ours | fastica")->capture_default_str();
  evl->add_option("--seed", eval_seed, "FastICA seed")->capture_default_str();
  evl->add_option("--out", eval_out, "write the result as JSON");

  TrainFlags repro_flags;
  std::string which, seeds = "0,1,2,3,4", methods = "ours,fastica", repro_out = "results";
  std::uint64_t repro_mixing_seed = 0;
  bool include_d30 = false;
  auto* rep = app.add_subcommand("reproduce", "run an experiment grid and write CSV results");
  repro_flags.add_to(rep);
  rep->add_option("which", which, "fig2a | fig2b | fig2c | table1")->required();
  rep->add_option("--seeds", seeds, "comma-separated seeds")->capture_default_str();
  rep->add_option("--methods", methods, "comma-separated methods")->capture_default_str();
  rep->add_option("--mixing-seed", repro_mixing_seed)->capture_default_str();
  rep->add_flag("--include-d30", include_d30, "add d=30 to fig2a");
  rep->add_option("--out", repro_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!kernels.empty() && !kernels::select(kernels)) fail(ErrorCode::InvalidArgument, "kernel table '" + kernels + "' is unavailable");
    if (*gen) return cmd_generate(gen_flags, manifest_in, gen_out, !no_csv);
    if (*check) return cmd_check_design(design_flags, design_out);
    if (*trn) return cmd_train(train_flags, train_data, train_out, train_seed);
    if (*evl) return cmd_evaluate(eval_data, eval_model, eval_method, eval_seed, eval_out);
    if (*rep) return cmd_reproduce(which, repro_flags, seeds, methods, repro_mixing_seed, include_d30, repro_out);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::Numerical ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
