#include <cstdio>
#include <filesystem>
#include <fstream>
#include <glob.h>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "equilibrate/equilibrate.hpp"

namespace {

using nlohmann::json;

void print_config_error(const std::string& code, const std::string& message) {
  json error = {{"code", code}, {"message", message}};
  std::fprintf(stderr, "%s\n", error.dump().c_str());
}

json load_json_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw equilibrate::ConfigError("CONFIG_NOT_FOUND", "cannot open " + path);
  try {
    return json::parse(file);
  } catch (const std::exception& e) {
    throw equilibrate::ConfigError("MALFORMED_CONFIG", std::string(e.what()));
  }
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t result;
  std::vector<std::string> paths;
  if (glob(pattern.c_str(), 0, nullptr, &result) == 0) {
    for (std::size_t i = 0; i < result.gl_pathc; ++i) paths.emplace_back(result.gl_pathv[i]);
  }
  globfree(&result);
  return paths;
}

int do_solve(const std::string& config_path, const std::optional<std::string>& out_dir,
             bool svg, bool print_config, bool timings) {
  equilibrate::ExperimentConfig config =
      equilibrate::experiment_config_from_json(load_json_file(config_path));
  if (out_dir) config.output = *out_dir;
  if (svg) config.svg = true;
  if (timings) config.real_timings = true;
  if (print_config) {
    json echo = config;
    std::printf("%s\n", echo.dump(2).c_str());
  }
  equilibrate::RunResult result = equilibrate::run(config);
  std::printf("wrote %s (final exploitability %.6g at iteration %ld)\n",
              config.output.c_str(), result.final_exploitability,
              result.records.empty() ? 0 : result.records.back().total_iteration);
  return 0;
}

int do_sweep(const std::string& pattern, const std::string& out_dir) {
  std::vector<std::string> paths = expand_glob(pattern);
  if (paths.empty()) {
    throw equilibrate::ConfigError("EMPTY_SWEEP", "no configs match " + pattern);
  }
  std::vector<equilibrate::SweepEntry> entries;
  entries.reserve(paths.size());
  for (const std::string& path : paths) {
    equilibrate::ExperimentConfig config =
        equilibrate::experiment_config_from_json(load_json_file(path));
    if (config.output == "out") {
      config.output =
          (std::filesystem::path(out_dir) / std::filesystem::path(path).stem()).string();
    }
    entries.push_back(equilibrate::SweepEntry{path, std::move(config)});
  }
  equilibrate::SweepResult result = equilibrate::sweep(entries, out_dir);
  std::printf("%s", result.summary_csv.c_str());
  for (const std::string& error : result.errors) {
    if (!error.empty()) {
      std::fprintf(stderr, "sweep run failed: %s\n", error.c_str());
      return 1;
    }
  }
  return 0;
}

int do_dump_game(const std::string& spec_text) {
  equilibrate::GameSpec spec = [&] {
    try {
      return equilibrate::GameSpec::parse(spec_text);
    } catch (const std::exception& e) {
      throw equilibrate::ConfigError("UNKNOWN_GAME", e.what());
    }
  }();
  json j;
  if (spec.is_matrix()) {
    to_json(j, spec.build_matrix());
  } else {
    to_json(j, spec.build_tree());
  }
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nash equilibrium solver and benchmark runner for two-player zero-sum games"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  bool svg = false;
  bool print_config = false;
  bool timings = false;
  CLI::App* solve = app.add_subcommand("solve", "run one experiment from a JSON config");
  solve->add_option("--config", config_path, "experiment config file")->required();
  solve->add_option("--out", out_dir, "output directory (overrides config)");
  solve->add_flag("--svg", svg, "also write curve.svg");
  solve->add_flag("--print-config", print_config, "echo the effective config");
  solve->add_flag("--timings", timings, "write measured wall times into records.csv");

  std::string configs_glob;
  std::string sweep_out = ".";
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a set of experiment configs");
  sweep_cmd->add_option("--configs", configs_glob, "glob of config files")->required();
  sweep_cmd->add_option("--out", sweep_out, "directory for summary.csv and default outputs");

  std::string game_spec;
  CLI::App* dump = app.add_subcommand("dump-game", "emit a game in its JSON schema");
  dump->add_option("--game", game_spec,
                   "game spec (kuhn | leduc | goofspiel:N | liars_dice:S | random_nfg:RxC:SEED)")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return do_solve(config_path, out_dir, svg, print_config, timings);
    if (sweep_cmd->parsed()) return do_sweep(configs_glob, sweep_out);
    if (dump->parsed()) return do_dump_game(game_spec);
  } catch (const equilibrate::ConfigError& e) {
    print_config_error(e.code(), e.what());
    return 2;
  } catch (const equilibrate::NumericalError& e) {
    nlohmann::json error = {{"code", "NUMERICAL_FAILURE"},
                            {"iteration", e.iteration()},
                            {"message", e.what()}};
    std::fprintf(stderr, "%s\n", error.dump().c_str());
    return 3;
  } catch (const std::exception& e) {
    print_config_error("INTERNAL_ERROR", e.what());
    return 2;
  }
  return 0;
}
