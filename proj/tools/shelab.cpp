// Experiment runner: presets over the simulation and analysis library.
// Exit codes: 0 success, 1 config error, 2 unsupported regime,
// 3 verification failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "she/config.hpp"
#include "she/io.hpp"
#include "she/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"shelab: heat-equation noise-peak experiments"};
  std::string config_path;
  std::string preset;
  std::string out_dir;
  long long seed = -1;
  int threads = -1;
  app.add_option("--config", config_path, "configuration file (key = value tables)");
  app.add_option("--preset", preset,
                 "experiment kind override: simulate|tail|dimension|chains|verify|"
                 "classify|bounded-domain-compare");
  app.add_option("--seed", seed, "seed override");
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--threads", threads,
                 "worker thread budget (default: SHELAB_THREADS env or hardware)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::string text;
    if (!config_path.empty()) text = she::read_file(config_path);
    auto cfg = she::parse_config(text);
    if (!preset.empty()) cfg.kind = preset;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads >= 0) {
      cfg.threads = threads;
    } else if (const char* env = std::getenv("SHELAB_THREADS")) {
      cfg.threads = std::atoi(env);
    }
    const auto res = she::run_experiment(cfg, text);
    if (!res.message.empty()) std::cerr << res.message << "\n";
    return res.exit_code;
  } catch (const she::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const she::unsupported_error& e) {
    std::cerr << "unsupported regime: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
