#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "adeuq/config.hpp"
#include "adeuq/dataset.hpp"
#include "adeuq/error.hpp"
#include "adeuq/io.hpp"
#include "adeuq/pce.hpp"
#include "adeuq/pipeline.hpp"
#include "adeuq/surrogate.hpp"

namespace adeuq::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::string preset;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out;
  std::string data;
  std::string checkpoint;
  std::string xi;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string section_of(std::string_view assignment) {
  const auto dot = assignment.find('.');
  const auto eq = assignment.find('=');
  if (dot == std::string_view::npos || eq == std::string_view::npos || dot > eq)
    fail(ErrorKind::config, "override '" + std::string(assignment) + "' is not section.key=value");
  return std::string(assignment.substr(0, dot));
}

std::string key_of(std::string_view assignment) {
  const auto dot = assignment.find('.');
  return std::string(assignment.substr(dot + 1, assignment.find('=') - dot - 1));
}

// Precedence: --threads, then ADEUQ_THREADS, then run.threads.
std::size_t resolve_threads(const Options& opt, const PipelineConfig& config) {
  if (opt.threads) {
    require(*opt.threads >= 1, "--threads must be >= 1");
    return *opt.threads;
  }
  if (const char* env = std::getenv("ADEUQ_THREADS"); env && *env) {
    std::size_t value = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value == 0)
      fail(ErrorKind::config, "ADEUQ_THREADS must be a positive integer, got '" +
                                  std::string(text) + "'");
    return value;
  }
  return config.run.threads;
}

// Preset, then config file, then --set overrides, then --seed.
PipelineConfig resolve_config(const Options& opt) {
  PipelineConfig config = PipelineConfig::defaults();
  if (!opt.config_path.empty()) {
    config = PipelineConfig::from_file(opt.config_path);
    if (!opt.preset.empty() && opt.preset != config.preset)
      fail(ErrorKind::config, "--preset " + opt.preset + " conflicts with the config file preset '" +
                                  config.preset + "'");
  } else if (!opt.preset.empty()) {
    config = PipelineConfig::from_preset(opt.preset);
  }
  for (const auto& assignment : opt.sets) config.apply_override(assignment);
  if (opt.seed) config.run.seed = *opt.seed;
  config.validate();
  return config;
}

std::vector<double> parse_xi(const std::string& text) {
  std::vector<double> xi;
  std::string_view rest(text);
  while (true) {
    const auto comma = rest.find(',');
    std::string_view token = rest.substr(0, comma);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() ||
        !std::isfinite(value))
      fail(ErrorKind::config, "--xi expects comma-separated finite numbers, got '" + text + "'");
    xi.push_back(value);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return xi;
}

fs::path sibling(const fs::path& report, const std::string& suffix) {
  return report.parent_path() / (report.stem().string() + suffix);
}

int cmd_generate(const Options& opt, std::ostream& out) {
  const PipelineConfig config = resolve_config(opt);
  const auto start = Clock::now();
  const Dataset dataset = generate_training_set(config, resolve_threads(opt, config));
  const DatasetWriteResult written = write_dataset(opt.out, dataset);
  out << "records " << written.records << "\n"
      << "bytes " << written.bytes << "\n"
      << "sha256 " << written.checksum << "\n"
      << "seconds " << seconds_since(start) << "\n";
  return exit_ok;
}

int cmd_train(const Options& opt, std::ostream& out) {
  if (!opt.config_path.empty() || !opt.preset.empty() || opt.seed)
    fail(ErrorKind::config,
         "train takes its configuration from the dataset manifest; use --set train.* instead");
  Dataset dataset = read_dataset(opt.data);
  PipelineConfig config = dataset.manifest.config;
  for (const auto& assignment : opt.sets) {
    const std::string section = section_of(assignment);
    if (section != "train" && !(section == "run" && key_of(assignment) == "threads"))
      fail(ErrorKind::config, "train accepts only train.* and run.threads overrides, got '" +
                                  assignment + "'");
    config.apply_override(assignment);
  }
  config.validate();
  dataset.manifest.config.train = config.train;

  const auto start = Clock::now();
  const MultiIndexSet set = config.multi_index_set();
  TrainResult result = train(dataset, config.architecture(), config.train_config(), set,
                             [&](std::size_t epoch, double mean_loss) {
                               out << "epoch " << epoch << " mean_loss "
                                   << format_double(mean_loss) << "\n";
                             });

  Checkpoint checkpoint{std::move(result.model), config, result.loss_history.back(),
                        std::move(result.loss_history)};
  write_checkpoint(opt.out, checkpoint);
  out << "final_loss " << format_double(checkpoint.final_loss) << "\n"
      << "weights " << checkpoint.model.arch.weight_count() << "\n"
      << "seconds " << seconds_since(start) << "\n";
  return exit_ok;
}

int cmd_evaluate(const Options& opt, std::ostream& out) {
  if (!opt.config_path.empty() || !opt.preset.empty() || opt.seed)
    fail(ErrorKind::config, "evaluate takes its configuration from the artifacts; use --set run.*");
  const Checkpoint checkpoint = read_checkpoint(opt.checkpoint);
  const Dataset training = read_dataset(opt.data);

  PipelineConfig eval_config = training.manifest.config;
  for (const auto& assignment : opt.sets) {
    if (section_of(assignment) != "run" || key_of(assignment) == "seed")
      fail(ErrorKind::config, "evaluate accepts only run.* overrides other than run.seed, got '" +
                                  assignment + "'");
    eval_config.apply_override(assignment);
  }
  eval_config.validate();
  const std::size_t threads = resolve_threads(opt, eval_config);

  DatasetManifest trained_on = training.manifest;
  trained_on.config = checkpoint.config;
  const MultiIndexSet set = checkpoint.config.multi_index_set();

  const auto t0 = Clock::now();
  const Dataset heldout = generate_heldout_set(eval_config, threads);
  const double heldout_seconds = seconds_since(t0);
  const auto t1 = Clock::now();
  const FieldStats oracle = mc_oracle(eval_config, eval_config.run.n_mc, threads);
  const double oracle_seconds = seconds_since(t1);
  const auto t2 = Clock::now();
  EvalReport report = evaluate(checkpoint.model, set, trained_on, heldout, oracle,
                               eval_config.run.n_mc, &training);
  report.loss_history = checkpoint.loss_history;
  const double evaluate_seconds = seconds_since(t2);

  const fs::path report_path(opt.out);
  write_text_file(report_path, report_json(report));

  const TimeGrid time = eval_config.time_grid();
  const SpatialGrid space = eval_config.spatial_grid();
  const FieldStats surrogate = surrogate_stats(checkpoint.model, set, time, space);
  write_field_csv(sibling(report_path, "_surrogate_mean.csv"), time, space, surrogate.mean);
  write_field_csv(sibling(report_path, "_surrogate_std.csv"), time, space, surrogate.stddev);
  write_field_csv(sibling(report_path, "_mc_mean.csv"), time, space, oracle.mean);
  write_field_csv(sibling(report_path, "_mc_std.csv"), time, space, oracle.stddev);

  // Wall-clock numbers live apart from the report so the report stays byte-stable.
  nlohmann::ordered_json timings;
  timings["heldout_seconds"] = heldout_seconds;
  timings["mc_oracle_seconds"] = oracle_seconds;
  timings["evaluate_seconds"] = evaluate_seconds;
  timings["threads"] = threads;
  write_text_file(report_path.string() + ".timings.json", timings.dump(2) + "\n");

  out << "mse " << format_double(report.mse) << "\n"
      << "relative_mse " << format_double(report.relative_mse) << "\n"
      << "mean_field_rmse " << format_double(report.mean_field_rmse) << "\n"
      << "std_field_rmse " << format_double(report.std_field_rmse) << "\n";
  return exit_ok;
}

int cmd_predict(const Options& opt, std::ostream& out) {
  const Checkpoint checkpoint = read_checkpoint(opt.checkpoint);
  const std::vector<double> xi = parse_xi(opt.xi);
  const MultiIndexSet set = checkpoint.config.multi_index_set();
  if (xi.size() != set.n_dim())
    fail(ErrorKind::config, "--xi has " + std::to_string(xi.size()) +
                                " values but the checkpoint expects n_dim = " +
                                std::to_string(set.n_dim()));

  const TimeGrid time = checkpoint.config.time_grid();
  const SpatialGrid space = checkpoint.config.spatial_grid();
  const GridInputs inputs = grid_inputs(time, space);
  const PCECoefficients coeffs(inputs.t.size(), set.size(),
                               forward_batch(checkpoint.model, inputs.t, inputs.z));
  std::vector<double> field(coeffs.n_points());
  for (std::size_t p = 0; p < field.size(); ++p) field[p] = pce_eval(coeffs.at(p), set, xi);
  write_field_csv(opt.out, time, space, field);
  out << "points " << field.size() << "\n";
  return exit_ok;
}

int cmd_mc_oracle(const Options& opt, std::ostream& out) {
  const PipelineConfig config = resolve_config(opt);
  const auto start = Clock::now();
  const FieldStats stats = mc_oracle(config, config.run.n_mc, resolve_threads(opt, config));
  const TimeGrid time = config.time_grid();
  const SpatialGrid space = config.spatial_grid();
  write_field_csv(opt.out + "_mean.csv", time, space, stats.mean);
  write_field_csv(opt.out + "_std.csv", time, space, stats.stddev);
  out << "samples " << config.run.n_mc << "\n"
      << "seconds " << seconds_since(start) << "\n";
  return exit_ok;
}

int cmd_show_config(const Options& opt, std::ostream& out) {
  out << resolve_config(opt).to_json_text(2) << "\n";
  return exit_ok;
}

void add_config_options(CLI::App& cmd, Options& opt) {
  cmd.add_option("--config", opt.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd.add_option("--preset", opt.preset, "Preset expanded before overrides: default or paper")
      ->check(CLI::IsMember({"default", "paper"}));
  cmd.add_option("--seed", opt.seed, "Overrides run.seed");
}

void add_set_option(CLI::App& cmd, Options& opt, const std::string& what) {
  cmd.add_option("--set", opt.sets, "Override " + what + " as section.key=value (repeatable)")
      ->allow_extra_args(false);
}

void add_threads_option(CLI::App& cmd, Options& opt) {
  cmd.add_option("--threads", opt.threads,
                 "Worker threads; falls back to ADEUQ_THREADS, then run.threads (default 1)");
}

std::string defaults_footer() {
  return "Config defaults (preset \"default\"):\n" + PipelineConfig::defaults().to_json_text(2) +
         "\n\nPreset \"paper\" expands to:\n" + PipelineConfig::paper().to_json_text(2) +
         "\n\nExit codes: 0 ok, 2 config or precondition, 3 I/O, 4 numerical, 5 checksum, "
         "6 manifest mismatch.";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument:
    case ErrorKind::config:
      return exit_config;
    case ErrorKind::io:
      return exit_io;
    case ErrorKind::numerical:
      return exit_numerical;
    case ErrorKind::checksum:
      return exit_checksum;
    case ErrorKind::manifest:
      return exit_manifest;
  }
  return exit_failure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Stochastic advection-diffusion surrogate with polynomial chaos outputs", "adeuq"};
  app.require_subcommand(1);
  app.footer(defaults_footer());

  CLI::App* generate = app.add_subcommand("generate", "Solve n_s sampled PDEs into a dataset");
  add_config_options(*generate, opt);
  add_set_option(*generate, opt, "any config field");
  add_threads_option(*generate, opt);
  generate->add_option("--out", opt.out, "Dataset directory")->required();

  CLI::App* train_cmd = app.add_subcommand("train", "Fit the surrogate to a dataset");
  train_cmd->add_option("--data", opt.data, "Dataset directory")->required();
  train_cmd->add_option("--out", opt.out, "Checkpoint directory")->required();
  add_set_option(*train_cmd, opt, "train.* or run.threads");
  add_threads_option(*train_cmd, opt);
  train_cmd->add_option("--config", opt.config_path, "Rejected: configuration comes from the dataset");
  train_cmd->add_option("--preset", opt.preset, "Rejected: configuration comes from the dataset");
  train_cmd->add_option("--seed", opt.seed, "Rejected: the seed is fixed by the dataset");

  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Score a checkpoint on held-out data and the MC oracle");
  evaluate_cmd->add_option("--data", opt.data, "Training dataset directory")->required();
  evaluate_cmd->add_option("--checkpoint", opt.checkpoint, "Checkpoint directory")->required();
  evaluate_cmd->add_option("--out", opt.out, "Report JSON path; field CSVs are written beside it")
      ->required();
  add_set_option(*evaluate_cmd, opt, "run.n_eval, run.n_mc or run.threads");
  add_threads_option(*evaluate_cmd, opt);
  evaluate_cmd->add_option("--config", opt.config_path, "Rejected: configuration comes from the artifacts");
  evaluate_cmd->add_option("--preset", opt.preset, "Rejected: configuration comes from the artifacts");
  evaluate_cmd->add_option("--seed", opt.seed, "Rejected: the seed is fixed by the dataset");

  CLI::App* predict = app.add_subcommand("predict", "Surrogate field for one germ xi");
  predict->add_option("--checkpoint", opt.checkpoint, "Checkpoint directory")->required();
  predict->add_option("--xi", opt.xi, "Comma-separated germ, e.g. \"0.5,-1\"")->required();
  predict->add_option("--out", opt.out, "Output CSV path")->required();

  CLI::App* mc = app.add_subcommand("mc-oracle", "Monte Carlo mean/std fields from fresh solves");
  add_config_options(*mc, opt);
  add_set_option(*mc, opt, "any config field");
  add_threads_option(*mc, opt);
  mc->add_option("--out", opt.out, "Output prefix; writes PREFIX_mean.csv and PREFIX_std.csv")
      ->required();

  CLI::App* show = app.add_subcommand("show-config", "Print the resolved config as JSON");
  add_config_options(*show, opt);
  add_set_option(*show, opt, "any config field");

  for (CLI::App* sub : app.get_subcommands({})) sub->footer(defaults_footer());

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  try {
    if (generate->parsed()) return cmd_generate(opt, out);
    if (train_cmd->parsed()) return cmd_train(opt, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(opt, out);
    if (predict->parsed()) return cmd_predict(opt, out);
    if (mc->parsed()) return cmd_mc_oracle(opt, out);
    if (show->parsed()) return cmd_show_config(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_failure;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace adeuq::cli
