// Command-line front end for the c-LFM pipeline.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "clfm/cvae/trainer.hpp"
#include "clfm/harness/experiment.hpp"

using namespace clfm::harness;

namespace {

Config load_with_overrides(const std::string& path, const std::vector<std::string>& sets) {
  Config c = Config::load(path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    c.set(s.substr(0, eq), s.substr(eq + 1));
  }
  return c;
}

void print_report(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained latent flow matching for random fields"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "INI config file")->required();
    sub->add_option("--set", sets, "Override a value, section.key=value (repeatable)");
  };

  auto* gen = app.add_subcommand("generate-data", "Write the training dataset");
  add_config(gen);
  auto* tv = app.add_subcommand("train-vae", "Train encoder and decoders");
  add_config(tv);
  auto* tf = app.add_subcommand("train-flow", "Train the latent velocity field");
  add_config(tf);
  auto* ev = app.add_subcommand("evaluate", "Sample and score against fresh ground truth");
  add_config(ev);
  auto* run = app.add_subcommand("run", "All stages plus a manifest");
  add_config(run);

  auto* sw = app.add_subcommand("sweep", "Full runs over values of one parameter");
  add_config(sw);
  std::string param;
  std::vector<std::string> values;
  sw->add_option("--param", param, "Config key, e.g. vae.lambda_r")->required();
  sw->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  auto* sm = app.add_subcommand("sample", "Draw fields from a trained model checkpoint");
  std::string ckpt;
  int n = 10, grid = 100;
  std::uint64_t seed = 0;
  std::string out_path;
  sm->add_option("checkpoint", ckpt, "model.ckpt from train-flow")->required();
  sm->add_option("--n", n, "Number of samples");
  sm->add_option("--grid", grid, "Grid points (1-D problems)");
  sm->add_option("--seed", seed, "Latent noise seed");
  sm->add_option("--out", out_path, "CSV destination (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sm) {
      clfm::ad::Matrix coords;
      const auto fields = sample_checkpoint(ckpt, n, grid, seed, &coords);
      Dataset d;
      d.header["format"] = "clfm-samples-1";
      d.header["seed"] = std::to_string(seed);
      d.header["code_version"] = code_version();
      d.coords = coords;
      for (std::size_t f = 0; f < fields.size(); ++f) {
        d.channels.push_back(fields.size() == 1 ? "u" : (f == 0 ? "u" : "v"));
      }
      d.values = fields;
      const std::string target = out_path.empty() ? "/dev/stdout" : out_path;
      write_dataset(target, d);
      return kExitOk;
    }
    const Config config = load_with_overrides(config_path, sets);
    if (*gen) stage_generate(config);
    if (*tv) stage_train_vae(config);
    if (*tf) stage_train_flow(config);
    if (*ev) print_report(stage_evaluate(config));
    if (*run) print_report(run_experiment(config));
    if (*sw) {
      for (const auto& s : run_sweep(config, param, values)) {
        std::cout << param << '=' << s.value << '\n';
        print_report(s.metrics);
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StageError& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitFailure;
  } catch (const clfm::cvae::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
