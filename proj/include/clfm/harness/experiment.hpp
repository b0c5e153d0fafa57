#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "clfm/cvae/trainer.hpp"
#include "clfm/fieldgen/wind.hpp"
#include "clfm/flow/trainer.hpp"
#include "clfm/harness/checkpoint.hpp"
#include "clfm/harness/config.hpp"
#include "clfm/harness/dataset.hpp"

namespace clfm::harness {

/// Everything an experiment id and its config resolve to.
struct Problem {
  std::string id;
  Config config;
  nets::DomainBox box;
  cvae::MeasurementOperator measurement;
  std::vector<std::string> fields;
  nets::EncoderSpec encoder;
  nets::DecoderSpec decoder;
  flow::VelocitySpec velocity;
  cvae::ConstraintSpec constraint;
  cvae::TrainConfig vae;
  flow::FlowTrainConfig flow;
  int flow_steps = 100;
  int n_eval = 1000;
  int eval_grid = 100;
  fieldgen::WindSpec wind;  // wind experiments only
  std::uint64_t seed = 0;

  bool trains() const { return id != "wind_verification"; }
  /// Evaluation coordinates: grid points (times appended for wind).
  ad::Matrix evaluation_coords(int grid_points) const;
};

/// Validates and resolves the config; throws ConfigError.
Problem make_problem(const Config& config);

/// Seed for a named pipeline stream, derived from the experiment seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum SeedStream : std::uint64_t {
  kDataStream = 1,
  kInitStream = 2,
  kVaeStream = 3,
  kFlowInitStream = 4,
  kFlowStream = 5,
  kSampleStream = 6,
  kPriorStream = 7,
  kEvalStream = 1000,
};

/// VAE plus velocity network, as held in a model checkpoint.
struct TrainedModel {
  Problem problem;
  cvae::VaeModel vae;
  flow::VelocityNet velocity;
  bool has_flow = false;

  nets::ParamList parameters() const;
};

TrainedModel build_model(const Problem& problem);
nlohmann::json architecture_json(const Problem& problem);
Checkpoint make_checkpoint(const TrainedModel& model);
/// Rebuilds the problem from the stored config and loads every parameter.
TrainedModel model_from_checkpoint(const Checkpoint& ckpt);

/// Training observations for the experiment (N x observation size).
Dataset generate_dataset(const Problem& problem);

/// Artifact locations under experiment.output_dir.
struct RunPaths {
  std::string dir;
  std::string path(const std::string& name) const { return dir + "/" + name; }
  std::string config() const { return path("config.ini"); }
  std::string data() const { return path("data.csv"); }
  std::string vae_loss() const { return path("vae_loss.csv"); }
  std::string vae_checkpoint() const { return path("vae.ckpt"); }
  std::string flow_loss() const { return path("flow_loss.csv"); }
  std::string model_checkpoint() const { return path("model.ckpt"); }
  std::string samples() const { return path("samples.csv"); }
  std::string metrics() const { return path("metrics.json"); }
  std::string manifest() const { return path("manifest.json"); }
};

RunPaths run_paths(const Config& config);

// Pipeline stages. Each reads what the previous one wrote; failures surface
// as StageError naming the stage.
void stage_generate(const Config& config);
void stage_train_vae(const Config& config);
void stage_train_flow(const Config& config);
nlohmann::json stage_evaluate(const Config& config);

/// n samples of every field on an evaluation grid with `grid` points per axis.
std::vector<ad::Matrix> sample_checkpoint(const std::string& path, int n, int grid,
                                          std::uint64_t seed, ad::Matrix* coords = nullptr);

/// All stages in order, then a manifest of every artifact with its digest.
nlohmann::json run_experiment(const Config& config);

struct SweepPoint {
  std::string value;
  nlohmann::json metrics;
};

/// Runs the full pipeline once per value of `param`, each in its own
/// subdirectory, and writes sweep_<param>.csv with the headline metrics.
std::vector<SweepPoint> run_sweep(const Config& config, const std::string& param,
                                  const std::vector<std::string>& values);

/// Writes `json` with a trailing newline.
void write_json(const std::string& path, const nlohmann::json& json);

}  // namespace clfm::harness
