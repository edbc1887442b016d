#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "equilibrate/cfr.hpp"
#include "equilibrate/games.hpp"
#include "equilibrate/minimizers.hpp"
#include "equilibrate/nfg.hpp"
#include "equilibrate/rt_nfg.hpp"

namespace equilibrate {

// Machine-readable configuration failure; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Numerical failure (NaN detected); the CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(long iteration, const std::string& message)
      : std::runtime_error(message), iteration_(iteration) {}
  long iteration() const { return iteration_; }

 private:
  long iteration_;
};

// Independent pure-strategy enumeration oracle for NFG exploitability; no
// code shared with nfg exploitability. Capped at 10^4 matrix entries.
inline double oracle_exploitability(const MatrixGame& game, const Profile& profile) {
  if (static_cast<long>(game.rows()) * game.cols() > 10000) {
    throw std::invalid_argument("oracle_exploitability: game too large");
  }
  check_profile_shape(game, profile);
  // Best pure response of player 1 against sigma_0 (player 1 maximizes u_1).
  bool first = true;
  double best_gain_1 = 0.0;
  for (int a1 = 0; a1 < game.cols(); ++a1) {
    double value = 0.0;
    for (int a0 = 0; a0 < game.rows(); ++a0) {
      value += profile.p0[a0] * game.at(a0, a1);
    }
    if (first || value > best_gain_1) best_gain_1 = value;
    first = false;
  }
  // Best pure response of player 0 against sigma_1 (player 0 maximizes -u_1).
  first = true;
  double best_gain_0 = 0.0;
  for (int a0 = 0; a0 < game.rows(); ++a0) {
    double value = 0.0;
    for (int a1 = 0; a1 < game.cols(); ++a1) {
      value += profile.p1[a1] * (-game.at(a0, a1));
    }
    if (first || value > best_gain_0) best_gain_0 = value;
    first = false;
  }
  return (best_gain_1 + best_gain_0) / 2.0;
}

enum class Algorithm {
  kRm,
  kRmPlus,
  kMwu,
  kOmwu,
  kGda,
  kOgda,
  kCfr,
  kCfrPlus,
  kRtrmPlus,
  kRtcfrPlus,
  kRtMwu,
  kRtOmwu,
  kDogda,
};

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kRm: return "rm";
    case Algorithm::kRmPlus: return "rm_plus";
    case Algorithm::kMwu: return "mwu";
    case Algorithm::kOmwu: return "omwu";
    case Algorithm::kGda: return "gda";
    case Algorithm::kOgda: return "ogda";
    case Algorithm::kCfr: return "cfr";
    case Algorithm::kCfrPlus: return "cfr_plus";
    case Algorithm::kRtrmPlus: return "rtrm_plus";
    case Algorithm::kRtcfrPlus: return "rtcfr_plus";
    case Algorithm::kRtMwu: return "rt_mwu";
    case Algorithm::kRtOmwu: return "rt_omwu";
    case Algorithm::kDogda: return "dogda";
  }
  return "?";
}

inline Algorithm algorithm_from_name(const std::string& name) {
  static const std::vector<Algorithm> all = {
      Algorithm::kRm,       Algorithm::kRmPlus,    Algorithm::kMwu,   Algorithm::kOmwu,
      Algorithm::kGda,      Algorithm::kOgda,      Algorithm::kCfr,   Algorithm::kCfrPlus,
      Algorithm::kRtrmPlus, Algorithm::kRtcfrPlus, Algorithm::kRtMwu, Algorithm::kRtOmwu,
      Algorithm::kDogda};
  for (Algorithm a : all) {
    if (name == algorithm_name(a)) return a;
  }
  throw ConfigError("UNKNOWN_ALGORITHM", "unknown algorithm: " + name);
}

inline bool is_rt_algorithm(Algorithm a) {
  return a == Algorithm::kRtrmPlus || a == Algorithm::kRtcfrPlus || a == Algorithm::kRtMwu ||
         a == Algorithm::kRtOmwu;
}

inline bool is_efg_algorithm(Algorithm a) {
  return a == Algorithm::kCfr || a == Algorithm::kCfrPlus || a == Algorithm::kRtcfrPlus ||
         a == Algorithm::kDogda;
}

struct ExperimentConfig {
  GameSpec game;
  Algorithm algorithm = Algorithm::kRtrmPlus;
  double mu = 0.1;
  long inner_iterations = 10;   // T
  long outer_iterations = 100;  // N
  double learning_rate = 0.1;
  Regularizer regularizer = Regularizer::kKl;  // for rt_mwu / rt_omwu
  bool alternating = true;
  Averaging averaging = Averaging::kNone;
  long total_iterations = 1000;  // non-RT algorithms
  long eval_every = 0;
  std::uint64_t seed = 0;
  std::string output = "out";
  bool svg = false;
  bool real_timings = false;  // write measured wall time into the CSV
  RtReach rt_reach = RtReach::kFull;

  long planned_iterations() const {
    return is_rt_algorithm(algorithm) ? inner_iterations * outer_iterations : total_iterations;
  }

  void validate() const {
    game.validate();
    if (is_rt_algorithm(algorithm)) {
      if (mu < 0.0) throw ConfigError("INVALID_PARAMETER", "mu must be nonnegative");
      if (inner_iterations < 0 || outer_iterations < 0) {
        throw ConfigError("INVALID_PARAMETER", "iteration counts must be nonnegative");
      }
    } else if (total_iterations < 0) {
      throw ConfigError("INVALID_PARAMETER", "total_iterations must be nonnegative");
    }
    bool needs_lr = algorithm == Algorithm::kMwu || algorithm == Algorithm::kOmwu ||
                    algorithm == Algorithm::kGda || algorithm == Algorithm::kOgda ||
                    algorithm == Algorithm::kRtMwu || algorithm == Algorithm::kRtOmwu ||
                    algorithm == Algorithm::kDogda;
    if (needs_lr && learning_rate <= 0.0) {
      throw ConfigError("INVALID_PARAMETER", "learning_rate must be positive");
    }
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& config) {
  j = nlohmann::json{
      {"game", config.game},
      {"algorithm", algorithm_name(config.algorithm)},
      {"mu", config.mu},
      {"inner_iterations", config.inner_iterations},
      {"outer_iterations", config.outer_iterations},
      {"learning_rate", config.learning_rate},
      {"regularizer", regularizer_name(config.regularizer)},
      {"alternating", config.alternating},
      {"averaging", config.averaging == Averaging::kNone
                        ? "none"
                        : (config.averaging == Averaging::kUniform ? "uniform" : "linear")},
      {"total_iterations", config.total_iterations},
      {"eval_every", config.eval_every},
      {"seed", config.seed},
      {"output", config.output},
      {"svg", config.svg},
      {"real_timings", config.real_timings},
      {"rt_reach", config.rt_reach == RtReach::kFull ? "full" : "self_only"},
  };
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  try {
    if (!j.contains("game")) throw ConfigError("MISSING_FIELD", "config needs a game");
    config.game = game_spec_from_json(j.at("game"));
    if (!j.contains("algorithm")) throw ConfigError("MISSING_FIELD", "config needs an algorithm");
    config.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    config.mu = j.value("mu", config.mu);
    config.inner_iterations = j.value("inner_iterations", config.inner_iterations);
    config.outer_iterations = j.value("outer_iterations", config.outer_iterations);
    config.learning_rate = j.value("learning_rate", config.learning_rate);
    if (j.contains("regularizer")) {
      std::string name = j.at("regularizer").get<std::string>();
      if (name == "euclidean") {
        config.regularizer = Regularizer::kEuclideanBregman;
      } else if (name == "kl") {
        config.regularizer = Regularizer::kKl;
      } else if (name == "reverse_entropy") {
        config.regularizer = Regularizer::kReverseEntropy;
      } else {
        throw ConfigError("INVALID_PARAMETER", "unknown regularizer: " + name);
      }
    }
    config.alternating = j.value("alternating", config.alternating);
    if (j.contains("averaging")) {
      std::string name = j.at("averaging").get<std::string>();
      if (name == "none") {
        config.averaging = Averaging::kNone;
      } else if (name == "uniform") {
        config.averaging = Averaging::kUniform;
      } else if (name == "linear") {
        config.averaging = Averaging::kLinear;
      } else {
        throw ConfigError("INVALID_PARAMETER", "unknown averaging: " + name);
      }
    }
    config.total_iterations = j.value("total_iterations", config.total_iterations);
    config.eval_every = j.value("eval_every", config.eval_every);
    config.seed = j.value("seed", config.seed);
    config.output = j.value("output", config.output);
    config.svg = j.value("svg", config.svg);
    config.real_timings = j.value("real_timings", config.real_timings);
    if (j.contains("rt_reach")) {
      std::string name = j.at("rt_reach").get<std::string>();
      if (name == "full") {
        config.rt_reach = RtReach::kFull;
      } else if (name == "self_only") {
        config.rt_reach = RtReach::kSelfOnly;
      } else {
        throw ConfigError("INVALID_PARAMETER", "unknown rt_reach: " + name);
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("MALFORMED_CONFIG", e.what());
  }
  config.validate();
  return config;
}

namespace detail {

inline std::string format_float(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace detail

// CSV serialization of a record stream. Floats carry 17 significant digits.
// Wall times are zeroed unless real timings are requested, keeping output
// bytes reproducible per (config, seed).
inline std::string records_to_csv(const std::vector<ConvergenceRecord>& records,
                                  bool real_timings = false) {
  std::string csv = "iteration,sccp_index,exploitability,duality_gap,wall_time_ns\n";
  for (const ConvergenceRecord& record : records) {
    csv += std::to_string(record.total_iteration);
    csv += ',';
    csv += std::to_string(record.sccp_index);
    csv += ',';
    csv += detail::format_float(record.exploitability);
    csv += ',';
    if (record.duality_gap) csv += detail::format_float(*record.duality_gap);
    csv += ',';
    csv += std::to_string(real_timings ? record.wall_time_ns : 0);
    csv += '\n';
  }
  return csv;
}

// Dependency-free semilog line chart of exploitability vs iteration, with
// fixed-precision coordinates so output is byte-stable.
inline std::string records_to_svg(const std::vector<ConvergenceRecord>& records) {
  const double width = 840.0, height = 520.0, margin = 60.0;
  std::vector<std::pair<double, double>> points;  // (iteration, log10 eps)
  double min_log = 0.0, max_log = -300.0, max_iter = 1.0;
  for (const ConvergenceRecord& r : records) {
    double eps = std::max(r.exploitability, 1e-300);
    double lg = std::log10(eps);
    points.emplace_back(static_cast<double>(r.total_iteration), lg);
    min_log = std::min(min_log, lg);
    max_log = std::max(max_log, lg);
    max_iter = std::max(max_iter, static_cast<double>(r.total_iteration));
  }
  if (max_log <= min_log) max_log = min_log + 1.0;
  char buffer[256];
  std::string svg;
  std::snprintf(buffer, sizeof(buffer),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.0f %.0f\">\n",
                width, height, width, height);
  svg += buffer;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buffer, sizeof(buffer),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                margin, height - margin, width - margin, height - margin);
  svg += buffer;
  std::snprintf(buffer, sizeof(buffer),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                margin, margin, margin, height - margin);
  svg += buffer;
  svg += "<text x=\"400\" y=\"505\" font-size=\"14\">iteration</text>\n";
  svg += "<text x=\"8\" y=\"260\" font-size=\"14\" transform=\"rotate(-90 14 264)\">"
         "log10 exploitability</text>\n";
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  bool first = true;
  for (auto [iter, lg] : points) {
    double x = margin + (width - 2 * margin) * (iter / max_iter);
    double y = margin + (height - 2 * margin) * ((max_log - lg) / (max_log - min_log));
    std::snprintf(buffer, sizeof(buffer), "%s%.3f,%.3f", first ? "" : " ", x, y);
    svg += buffer;
    first = false;
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

struct RunResult {
  std::vector<ConvergenceRecord> records;
  nlohmann::json final_profile;
  double final_exploitability = 0.0;
  bool averaging_flagged = false;
};

namespace detail {

inline void check_records(const std::vector<ConvergenceRecord>& records) {
  for (const ConvergenceRecord& r : records) {
    if (!std::isfinite(r.exploitability) || (r.duality_gap && !std::isfinite(*r.duality_gap))) {
      throw NumericalError(r.total_iteration,
                           "non-finite value at iteration " + std::to_string(r.total_iteration));
    }
  }
}

inline nlohmann::json profile_to_json(const Profile& profile) {
  return nlohmann::json{{"p0", profile.p0.probs()}, {"p1", profile.p1.probs()}};
}

}  // namespace detail

// Executes one experiment in memory. Algorithms that need a matrix accept
// EFG specs only when the tree is a depth-2 embedding; tree algorithms
// embed matrix specs.
inline RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunResult result;

  if (is_efg_algorithm(config.algorithm)) {
    TreeGame tree = config.game.build_tree();
    ValidationResult check = validate(tree);
    if (!check.ok()) {
      throw ConfigError(validation_code_name(check.code), check.message);
    }
    switch (config.algorithm) {
      case Algorithm::kCfr:
      case Algorithm::kCfrPlus: {
        bool plus = config.algorithm == Algorithm::kCfrPlus;
        Averaging avg = config.averaging == Averaging::kNone
                            ? (plus ? Averaging::kLinear : Averaging::kUniform)
                            : config.averaging;
        CfrRunResult r = cfr_run(tree, config.total_iterations, plus, config.alternating,
                                 avg == Averaging::kLinear, config.eval_every);
        result.records = std::move(r.records);
        result.final_profile = behavior_profile_to_json(r.profile);
        break;
      }
      case Algorithm::kRtcfrPlus: {
        RtRunConfig rt{config.mu, config.inner_iterations, config.outer_iterations,
                       config.alternating, config.eval_every, config.seed};
        RtcfrResult r = rtcfr_plus_run(tree, rt, config.rt_reach);
        result.records = std::move(r.records);
        result.final_profile = behavior_profile_to_json(r.final_profile);
        break;
      }
      case Algorithm::kDogda: {
        CfrRunResult r = dogda_run(tree, config.total_iterations, config.learning_rate, nullptr,
                                   config.eval_every);
        result.records = std::move(r.records);
        result.final_profile = behavior_profile_to_json(r.profile);
        break;
      }
      default:
        throw ConfigError("ALGORITHM_GAME_MISMATCH", "not an EFG algorithm");
    }
  } else {
    std::optional<MatrixGame> matrix;
    if (config.game.is_matrix()) {
      matrix = config.game.build_matrix();
    } else {
      matrix = try_extract_matrix(config.game.build_tree());
      if (!matrix) {
        throw ConfigError("ALGORITHM_GAME_MISMATCH",
                          "NFG algorithm requires a matrix game or a depth-2 embedding");
      }
    }
    if (!matrix->payoffs_within_unit_range()) {
      std::fprintf(stderr, "warning: payoffs outside [-1, 1]\n");
    }
    switch (config.algorithm) {
      case Algorithm::kRtrmPlus: {
        RtRunConfig rt{config.mu, config.inner_iterations, config.outer_iterations,
                       config.alternating, config.eval_every, config.seed};
        RtNfgResult r = rtrm_plus_run(*matrix, rt);
        result.records = std::move(r.records);
        result.final_profile = detail::profile_to_json(r.final_profile);
        break;
      }
      case Algorithm::kRtMwu:
      case Algorithm::kRtOmwu: {
        RtRunConfig rt{config.mu, config.inner_iterations, config.outer_iterations,
                       config.alternating, config.eval_every, config.seed};
        RtNfgResult r = rt_mwu_run(*matrix, rt, config.regularizer, config.learning_rate,
                                   config.algorithm == Algorithm::kRtOmwu);
        result.records = std::move(r.records);
        result.final_profile = detail::profile_to_json(r.final_profile);
        break;
      }
      default: {
        MinimizerConfig algo;
        switch (config.algorithm) {
          case Algorithm::kRm: algo.kind = MinimizerKind::kRm; break;
          case Algorithm::kRmPlus: algo.kind = MinimizerKind::kRmPlus; break;
          case Algorithm::kMwu: algo.kind = MinimizerKind::kMwu; break;
          case Algorithm::kOmwu:
            algo.kind = MinimizerKind::kMwu;
            algo.optimistic = true;
            break;
          case Algorithm::kGda: algo.kind = MinimizerKind::kGda; break;
          case Algorithm::kOgda:
            algo.kind = MinimizerKind::kGda;
            algo.optimistic = true;
            break;
          default: throw ConfigError("ALGORITHM_GAME_MISMATCH", "unhandled algorithm");
        }
        algo.learning_rate = config.learning_rate;
        BaselineResult r = baseline_selfplay_run(*matrix, algo, config.total_iterations,
                                                 config.alternating, config.averaging,
                                                 config.eval_every);
        result.records = std::move(r.records);
        result.final_profile = detail::profile_to_json(r.profile);
        result.averaging_flagged = r.averaging_flagged;
        break;
      }
    }
  }
  detail::check_records(result.records);
  result.final_exploitability =
      result.records.empty() ? 0.0 : result.records.back().exploitability;
  return result;
}

// Runs one experiment and writes records.csv, final_profile.json, config.json
// and optionally curve.svg into the output directory.
inline RunResult run(const ExperimentConfig& config) {
  RunResult result = run_experiment(config);
  std::filesystem::path out(config.output);
  std::filesystem::create_directories(out);
  if (result.averaging_flagged) {
    std::fprintf(stderr, "warning: averaging requested for a last-iterate algorithm\n");
  }
  {
    std::ofstream file(out / "records.csv", std::ios::binary);
    file << records_to_csv(result.records, config.real_timings);
  }
  {
    std::ofstream file(out / "final_profile.json", std::ios::binary);
    file << result.final_profile.dump(2) << "\n";
  }
  {
    nlohmann::json echo = config;
    std::ofstream file(out / "config.json", std::ios::binary);
    file << echo.dump(2) << "\n";
  }
  if (config.svg) {
    std::ofstream file(out / "curve.svg", std::ios::binary);
    file << records_to_svg(result.records);
  }
  return result;
}

struct SweepEntry {
  std::string label;
  ExperimentConfig config;
};

struct SweepResult {
  std::vector<double> final_exploitability;  // one per config, in input order
  std::vector<std::string> errors;           // empty string = success
  std::string summary_csv;
};

inline int sweep_worker_count(std::size_t jobs) {
  if (const char* env = std::getenv("EQUILIBRATE_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return static_cast<int>(std::min<std::size_t>(n, jobs));
  }
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min<std::size_t>(hw == 0 ? 1 : hw, jobs));
}

// Runs every config (concurrently on a bounded pool), writes per-run outputs
// plus summary.csv ordered like the input list. The first failure is
// reported after all remaining runs complete.
inline SweepResult sweep(const std::vector<SweepEntry>& entries,
                         const std::filesystem::path& summary_dir) {
  if (entries.empty()) throw ConfigError("EMPTY_SWEEP", "no configs to run");
  SweepResult result;
  result.final_exploitability.assign(entries.size(), 0.0);
  result.errors.assign(entries.size(), "");

  std::mutex mutex;
  std::size_t next = 0;
  int workers = sweep_worker_count(entries.size());
  auto worker = [&]() {
    while (true) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(mutex);
        if (next >= entries.size()) return;
        index = next++;
      }
      try {
        RunResult r = run(entries[index].config);
        result.final_exploitability[index] = r.final_exploitability;
      } catch (const std::exception& e) {
        result.errors[index] = e.what();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();

  std::string csv = "config,algorithm,game,final_exploitability\n";
  for (std::size_t i = 0; i < entries.size(); ++i) {
    csv += entries[i].label;
    csv += ',';
    csv += algorithm_name(entries[i].config.algorithm);
    csv += ',';
    csv += entries[i].config.game.name();
    csv += ',';
    csv += result.errors[i].empty() ? detail::format_float(result.final_exploitability[i])
                                    : "error";
    csv += '\n';
  }
  result.summary_csv = csv;
  std::filesystem::create_directories(summary_dir);
  std::ofstream file(summary_dir / "summary.csv", std::ios::binary);
  file << csv;
  return result;
}

}  // namespace equilibrate
