#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pushsum/harness.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool tee_csv = false;
  bool sweep = false;
};

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitFail = 2;

std::vector<pushsum::ExperimentConfig> load_configs(const Options& opt, const std::string& mode) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(pushsum::read_file(opt.config_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw pushsum::Error(pushsum::Errc::ConfigInvalid,
                         "config is not valid JSON: " + std::string(e.what()));
  }
  std::vector<nlohmann::json> entries;
  if (opt.sweep) {
    if (!doc.is_array()) {
      throw pushsum::Error(pushsum::Errc::ConfigInvalid, "--sweep expects a JSON array of configs");
    }
    entries.assign(doc.begin(), doc.end());
  } else {
    entries.push_back(doc);
  }
  std::vector<pushsum::ExperimentConfig> configs;
  for (const auto& e : entries) {
    auto cfg = pushsum::config_from_json(e);
    if (!cfg.mode.empty() && cfg.mode != mode) {
      throw pushsum::Error(pushsum::Errc::ConfigInvalid,
                           "config mode '" + cfg.mode + "' does not match subcommand '" + mode +
                               "'");
    }
    cfg.mode = mode;
    if (opt.seed) cfg.schedule.seed = opt.seed;
    pushsum::validate(cfg);
    configs.push_back(std::move(cfg));
  }
  return configs;
}

void report(const pushsum::RunArtifact& art, const std::filesystem::path& dir) {
  std::cerr << art.config.mode << ": " << (art.pass ? "pass" : "FAIL") << " ("
            << art.wall_clock_seconds << " s) -> " << dir.string() << '\n';
  for (const auto& c : art.summary.at("certifications")) {
    std::cerr << "  " << (c.at("pass").get<bool>() ? "ok  " : "FAIL") << ' '
              << c.at("name").get<std::string>()
              << "  measured=" << pushsum::format_double(c.at("measured").is_null()
                                                             ? std::nan("")
                                                             : c.at("measured").get<double>())
              << "  bound="
              << pushsum::format_double(c.at("bound").is_null() ? std::nan("")
                                                                : c.at("bound").get<double>())
              << '\n';
  }
}

int run(const Options& opt, const std::string& mode) {
  const auto configs = load_configs(opt, mode);
  const std::filesystem::path out(opt.out_dir);

  std::vector<pushsum::RunArtifact> artifacts;
  std::vector<std::filesystem::path> dirs;
  if (!opt.sweep) {
    artifacts.push_back(pushsum::run_experiment(configs.front()));
    dirs.push_back(out);
  } else {
    std::vector<std::future<pushsum::RunArtifact>> jobs;
    for (const auto& cfg : configs) {
      jobs.push_back(std::async(std::launch::async, [cfg] { return pushsum::run_experiment(cfg); }));
    }
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      artifacts.push_back(jobs[k].get());
      dirs.push_back(out / ("run_" + std::to_string(k + 1)));
    }
  }

  bool pass = true;
  for (std::size_t k = 0; k < artifacts.size(); ++k) {
    pushsum::write_artifact(artifacts[k], dirs[k]);
    if (opt.tee_csv) std::cout << artifacts[k].trace_csv;
    report(artifacts[k], dirs[k]);
    pass = pass && artifacts[k].pass;
  }
  return pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust push-sum consensus and distributed dual averaging under packet loss"};
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::pair<std::string, std::string>> modes = {
      {"consensus", "run push-sum / robust push-sum and certify the consensus error"},
      {"optimize", "run distributed dual averaging and certify the optimality gap"},
      {"matrix-audit", "audit the augmented iteration matrices over a window"},
      {"verify-schedule", "generate a failure schedule and check its reliability window"},
  };
  for (const auto& [name, help] : modes) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON experiment config")->required();
    sub->add_option("--seed", opt.seed, "override the schedule seed");
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    sub->add_flag("--tee-csv", opt.tee_csv, "also write the trace CSV to stdout");
    sub->add_flag("--sweep", opt.sweep, "config is an array; run entries concurrently");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitError;
  }

  const std::string mode = app.get_subcommands().front()->get_name();
  try {
    return run(opt, mode);
  } catch (const pushsum::Error& e) {
    std::cerr << "error [" << pushsum::to_string(e.code()) << "]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitError;
}
