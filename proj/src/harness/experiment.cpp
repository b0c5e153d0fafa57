#include "clfm/harness/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "clfm/constraints/coherence.hpp"
#include "clfm/fieldgen/gp.hpp"
#include "clfm/fieldgen/kernels.hpp"
#include "clfm/fieldgen/poisson.hpp"
#include "clfm/fieldgen/srm.hpp"
#include "clfm/flow/sampler.hpp"
#include "clfm/harness/digest.hpp"
#include "clfm/harness/metrics.hpp"

namespace clfm::harness {

using ad::Matrix;
using Eigen::Index;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

constexpr double kNormal95 = 1.6448536269514722;  // standard normal 0.95 quantile

int positive(const Config& c, const std::string& key) {
  const int v = c.get_int(key);
  if (v < 1) throw ConfigError(key + " must be positive, got " + std::to_string(v));
  return v;
}

int nonnegative(const Config& c, const std::string& key) {
  const int v = c.get_int(key);
  if (v < 0) throw ConfigError(key + " must be nonnegative, got " + std::to_string(v));
  return v;
}

double nonnegative_double(const Config& c, const std::string& key) {
  const double v = c.get_double(key);
  if (!(v >= 0.0)) throw ConfigError(key + " must be nonnegative");
  return v;
}

nets::DomainBox box_of(const std::vector<double>& lo, const std::vector<double>& hi) {
  nets::DomainBox b;
  b.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Index>(lo.size()));
  b.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Index>(hi.size()));
  return b;
}

/// Spatial sensor points for the wind experiments: `columns` evenly chosen
/// x2 columns of the grid, every height.
Matrix wind_sensor_points(const fieldgen::WindSpec& w, int columns) {
  if (columns < 1 || columns > w.nx2) {
    throw ConfigError("data.sensor_columns must be in [1, nx2]");
  }
  const Matrix grid = w.grid();
  Matrix pts(static_cast<Index>(columns) * w.nx3, 2);
  for (int c = 0; c < columns; ++c) {
    const int col = columns == 1 ? 0
                                 : static_cast<int>(std::lround(
                                       static_cast<double>(c) * (w.nx2 - 1) / (columns - 1)));
    for (int k = 0; k < w.nx3; ++k) pts.row(c * w.nx3 + k) = grid.row(col * w.nx3 + k);
  }
  return pts;
}

Matrix coherence_targets(const fieldgen::WindSpec& w, const Matrix& points,
                         const constraints::PairSet& pairs, const Eigen::VectorXd& freqs,
                         bool squared) {
  Matrix t(static_cast<Index>(pairs.size()), freqs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (Index f = 0; f < freqs.size(); ++f) {
      const double c = fieldgen::coherence_target(w, points.row(pairs.first[k]),
                                                  points.row(pairs.second[k]), freqs(f));
      t(static_cast<Index>(k), f) = squared ? c * c : c;
    }
  }
  return t;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename F>
auto guarded(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const cvae::NumericalError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::overflow_error& e) {
    throw StageError(stage, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream).
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream * 0xBF58476D1CE4E5B9ULL + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix Problem::evaluation_coords(int grid_points) const {
  if (grid_points < 2) throw ConfigError("evaluation grid needs at least 2 points");
  if (id == "gp_reconstruction" || id == "poisson_inference") {
    return fieldgen::linspace_column(box.lo(0), box.hi(0), grid_points);
  }
  return cvae::space_time_coords(wind.grid(), wind.times());
}

Problem make_problem(const Config& config) {
  Problem p;
  p.id = config.experiment();
  p.config = config;
  p.seed = config.get_seed("experiment.seed");
  p.n_eval = positive(config, "experiment.n_eval_samples");
  p.eval_grid = positive(config, "experiment.eval_grid");
  if (p.n_eval < 2 || p.eval_grid < 2) {
    throw ConfigError("evaluation needs at least 2 samples and 2 grid points");
  }
  positive(config, "data.n_samples");
  const int m = positive(config, "data.sensors");

  p.encoder.latent_dim = positive(config, "network.latent_dim");
  p.encoder.layers = positive(config, "network.encoder_layers");
  p.encoder.width = positive(config, "network.encoder_width");
  p.decoder.latent_dim = p.encoder.latent_dim;
  p.decoder.width_p = positive(config, "network.width_p");
  const std::string branch = config.get_string("network.branch_kind");
  if (branch == "mlp") {
    p.decoder.branch_kind = nets::BranchKind::mlp;
  } else if (branch == "residual") {
    p.decoder.branch_kind = nets::BranchKind::residual;
  } else {
    throw ConfigError("network.branch_kind must be 'mlp' or 'residual'");
  }
  p.decoder.branch_layers = positive(config, "network.branch_layers");
  p.decoder.branch_width = positive(config, "network.branch_width");
  p.decoder.trunk_layers = positive(config, "network.trunk_layers");
  p.decoder.trunk_width = positive(config, "network.trunk_width");

  p.velocity.latent_dim = p.encoder.latent_dim;
  p.velocity.layers = positive(config, "flow.layers");
  p.velocity.width = positive(config, "flow.width");
  p.flow_steps = positive(config, "flow.steps");

  p.vae.batch_size = positive(config, "vae.batch_size");
  p.vae.learning_rate = config.get_double("vae.learning_rate");
  p.vae.epochs = nonnegative(config, "vae.epochs");
  p.vae.weights.kl = nonnegative_double(config, "vae.lambda_kl");
  p.vae.weights.statistics = nonnegative_double(config, "vae.lambda_r");
  p.vae.weights.physics = nonnegative_double(config, "vae.lambda_f");
  p.vae.keep_best = config.get_bool("vae.keep_best");
  p.vae.seed = derive_seed(p.seed, kVaeStream);
  if (!(p.vae.learning_rate > 0.0)) throw ConfigError("vae.learning_rate must be positive");
  if (p.vae.weights.statistics > 0.0 && p.vae.weights.physics > 0.0) {
    throw ConfigError("only one of vae.lambda_r and vae.lambda_f may be nonzero");
  }

  p.flow.batch_size = positive(config, "flow.batch_size");
  p.flow.learning_rate = config.get_double("flow.learning_rate");
  p.flow.epochs = nonnegative(config, "flow.epochs");
  p.flow.noise = nonnegative_double(config, "flow.noise");
  p.flow.sample_z0 = config.get_bool("flow.sample_z0");
  p.flow.seed = derive_seed(p.seed, kFlowStream);
  if (!(p.flow.learning_rate > 0.0)) throw ConfigError("flow.learning_rate must be positive");

  try {
    p.constraint.kind = cvae::parse_constraint(config.get_string("constraint.kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  p.constraint.collocation = positive(config, "constraint.collocation");
  p.constraint.boundary = config.get_bool("constraint.boundary");
  const double h = nonnegative_double(config, "constraint.h");
  const auto kind = p.constraint.kind;

  if (p.id == "gp_reconstruction") {
    p.box = nets::DomainBox::interval(0.0, 1.0);
    p.fields = {"u"};
    p.measurement = cvae::MeasurementOperator(cvae::uniform_sensors(0.0, 1.0, m), p.box);
    if (kind != cvae::ConstraintKind::none && kind != cvae::ConstraintKind::covariance &&
        kind != cvae::ConstraintKind::correlation) {
      throw ConfigError("gp_reconstruction supports constraint kinds none, covariance, correlation");
    }
    p.constraint.covariance_target = [](const Matrix& x) {
      return fieldgen::gp_kernel(fieldgen::GpSpec{}, x);
    };
  } else if (p.id == "poisson_inference") {
    const double len = fieldgen::kPoissonLength;
    p.box = nets::DomainBox::interval(0.0, len);
    p.fields = {"u", "v"};
    p.measurement = cvae::MeasurementOperator(cvae::uniform_sensors(0.0, len, m), p.box, {0});
    if (kind != cvae::ConstraintKind::none && kind != cvae::ConstraintKind::poisson) {
      throw ConfigError("poisson_inference supports constraint kinds none, poisson");
    }
    if (config.get_int("data.resolution") < 64) throw ConfigError("data.resolution must be >= 64");
    p.constraint.h = h > 0.0 ? h : 1e-3 * len;
    p.constraint.forcing = fieldgen::poisson_forcing;
  } else {
    fieldgen::WindSpec& w = p.wind;
    w.nx2 = positive(config, "data.nx2");
    w.nx3 = positive(config, "data.nx3");
    w.n_freq = positive(config, "data.n_freq");
    w.f_max = config.get_double("data.f_max");
    try {
      w.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const double t_end = (w.n_time() - 1) * w.dt();
    p.box = box_of({0.0, w.min_height, 0.0}, {w.width, w.height, t_end});
    p.fields = {"u"};
    p.decoder.coord_dim = 3;
    const Matrix pts = wind_sensor_points(w, config.get_int("data.sensor_columns"));
    p.measurement = cvae::MeasurementOperator(cvae::space_time_coords(pts, w.times()), p.box);
    if (kind != cvae::ConstraintKind::none && kind != cvae::ConstraintKind::coherence) {
      throw ConfigError(p.id + " supports constraint kinds none, coherence");
    }
    p.constraint.times = w.times();
    try {
      p.constraint.welch = constraints::make_welch_plan(w.n_time());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const std::string target = config.get_string("constraint.coherence_target");
    if (target != "coh" && target != "coh_squared") {
      throw ConfigError("constraint.coherence_target must be 'coh' or 'coh_squared'");
    }
    const bool squared = target == "coh_squared";
    p.constraint.coherence_target = [w, squared](const Matrix& pts,
                                                 const constraints::PairSet& pairs,
                                                 const Eigen::VectorXd& freqs) {
      return coherence_targets(w, pts, pairs, freqs, squared);
    };
    if (kind == cvae::ConstraintKind::coherence && p.constraint.collocation < 2) {
      throw ConfigError("coherence constraint needs constraint.collocation >= 2");
    }
  }
  p.encoder.input_dim = static_cast<int>(p.measurement.observation_size());
  return p;
}

nets::ParamList TrainedModel::parameters() const {
  nets::ParamList out = vae.parameters();
  velocity.collect(out, "velocity");
  return out;
}

TrainedModel build_model(const Problem& problem) {
  TrainedModel m;
  m.problem = problem;
  std::mt19937_64 rng(derive_seed(problem.seed, kInitStream));
  m.vae = cvae::VaeModel::build(problem.encoder, problem.decoder, problem.box,
                                problem.measurement, problem.fields, rng);
  std::mt19937_64 flow_rng(derive_seed(problem.seed, kFlowInitStream));
  m.velocity = flow::VelocityNet(problem.velocity, flow_rng);
  return m;
}

json architecture_json(const Problem& p) {
  json sensors = json::array();
  for (Index i = 0; i < p.measurement.sensors.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < p.measurement.sensors.cols(); ++k) row.push_back(p.measurement.sensors(i, k));
    sensors.push_back(row);
  }
  return {
      {"experiment", p.id},
      {"fields", p.fields},
      {"observed_fields", p.measurement.fields},
      {"sensor_count", p.measurement.count()},
      {"sensors_digest", sha256_hex(sensors.dump())},
      {"box", {{"lo", std::vector<double>(p.box.lo.data(), p.box.lo.data() + p.box.dim())},
               {"hi", std::vector<double>(p.box.hi.data(), p.box.hi.data() + p.box.dim())}}},
      {"encoder",
       {{"input", p.encoder.input_dim}, {"latent", p.encoder.latent_dim},
        {"layers", p.encoder.layers}, {"width", p.encoder.width}, {"activation", "gelu"}}},
      {"decoder",
       {{"p", p.decoder.width_p},
        {"coord_dim", p.decoder.coord_dim},
        {"branch", p.decoder.branch_kind == nets::BranchKind::mlp ? "mlp" : "residual"},
        {"branch_layers", p.decoder.branch_layers},
        {"branch_width", p.decoder.branch_width},
        {"trunk_layers", p.decoder.trunk_layers},
        {"trunk_width", p.decoder.trunk_width}}},
      {"velocity",
       {{"latent", p.velocity.latent_dim}, {"layers", p.velocity.layers},
        {"width", p.velocity.width}}},
  };
}

Checkpoint make_checkpoint(const TrainedModel& model) {
  Checkpoint c;
  c.code_version = code_version();
  c.seed = model.problem.seed;
  c.config = model.problem.config.values();
  c.config_digest = sha256_hex(model.problem.config.to_ini());
  c.architecture = architecture_json(model.problem);
  const auto& enc = model.vae.encoder;
  c.extra = {{"has_flow", model.has_flow},
             {"input_shift", encode_matrix(enc.shift())},
             {"input_scale", encode_matrix(enc.scale())}};
  store_parameters(c, model.parameters());
  return c;
}

TrainedModel model_from_checkpoint(const Checkpoint& ckpt) {
  const auto values = ckpt.config.get<std::map<std::string, std::string>>();
  auto it = values.find("experiment.id");
  if (it == values.end()) throw CheckpointMismatch("checkpoint config lacks experiment.id");
  Config cfg = Config::defaults(it->second);
  for (const auto& [k, v] : values) cfg.set(k, v);
  const Problem problem = make_problem(cfg);
  require_architecture(ckpt, architecture_json(problem));
  TrainedModel m = build_model(problem);
  restore_parameters(ckpt, m.parameters());
  const Index d = m.vae.encoder.input_dim();
  m.vae.encoder.set_standardization(
      decode_matrix(ckpt.extra.at("input_shift").get<std::string>(), 1, d),
      decode_matrix(ckpt.extra.at("input_scale").get<std::string>(), 1, d));
  m.has_flow = ckpt.extra.at("has_flow").get<bool>();
  return m;
}

Dataset generate_dataset(const Problem& p) {
  Dataset d;
  d.header["format"] = "clfm-dataset-1";
  d.header["experiment"] = p.id;
  d.header["seed"] = std::to_string(p.seed);
  d.header["code_version"] = code_version();
  for (const auto& [k, v] : p.config.values()) d.header["config." + k] = v;
  const int n = p.config.get_int("data.n_samples");
  const std::uint64_t seed = derive_seed(p.seed, kDataStream);
  d.coords = p.measurement.sensors;
  d.channels = {"u"};

  if (p.id == "gp_reconstruction") {
    d.values = {fieldgen::gp_sample(fieldgen::GpSpec{}, d.coords, n, seed)};
  } else if (p.id == "poisson_inference") {
    std::mt19937_64 rng(seed);
    const int res = p.config.get_int("data.resolution");
    Matrix u(n, d.coords.rows());
    for (int s = 0; s < n; ++s) {
      const auto sol = fieldgen::poisson_solve(fieldgen::sample_poisson_eps({}, rng), res);
      for (Index k = 0; k < d.coords.rows(); ++k) u(s, k) = sol.u_at(d.coords(k, 0));
    }
    d.values = {u};
  } else if (p.id == "wind_desk") {
    const Matrix pts = wind_sensor_points(p.wind, p.config.get_int("data.sensor_columns"));
    d.values = {fieldgen::SrmSampler(p.wind, pts).sample_wind(n, seed)};
  } else {
    // Verification needs no training set; a small preview of the full grid is written.
    d.coords = cvae::space_time_coords(p.wind.grid(), p.wind.times());
    d.values = {fieldgen::SrmSampler(p.wind, p.wind.grid()).sample_wind(std::min(n, 20), seed)};
  }
  return d;
}

RunPaths run_paths(const Config& config) {
  return RunPaths{config.get_string("experiment.output_dir")};
}

namespace {

void ensure_dir(const RunPaths& paths) {
  std::error_code ec;
  fs::create_directories(paths.dir, ec);
  if (ec) throw StageError("setup", "cannot create '" + paths.dir + "': " + ec.message(), false);
}

Matrix load_observations(const Problem& p, const RunPaths& paths) {
  const Dataset d = read_dataset(paths.data());
  if (d.coords.rows() != p.measurement.sensors.rows() ||
      d.coords.cols() != p.measurement.sensors.cols() ||
      !d.coords.isApprox(p.measurement.sensors, 1e-12)) {
    throw std::runtime_error("dataset sensors do not match the configured measurement operator");
  }
  if (d.header.count("experiment") && d.header.at("experiment") != p.id) {
    throw std::runtime_error("dataset was generated for experiment '" + d.header.at("experiment") +
                             "'");
  }
  return d.observations();
}

std::uint64_t eval_seed(const Problem& p) {
  const std::uint64_t s = p.config.get_seed("experiment.eval_seed");
  return s != 0 ? s : derive_seed(p.seed, kEvalStream);
}

json gp_report(const TrainedModel& m) {
  const Problem& p = m.problem;
  const Matrix grid = p.evaluation_coords(p.eval_grid);
  const fieldgen::GpSpec spec;
  const Matrix truth = fieldgen::gp_sample(spec, grid, p.n_eval, eval_seed(p));
  const Matrix lfm = flow::generate_fields(m.velocity, m.vae, p.n_eval, grid,
                                           derive_seed(p.seed, kSampleStream), p.flow_steps)[0];
  const Matrix prior =
      flow::sample_vae_prior(m.vae, p.n_eval, grid, derive_seed(p.seed, kPriorStream))[0];

  // Spatially constant baseline: each truth draw's value at the grid point
  // nearest the first sensor, spread over the whole domain around the mean.
  Index near = 0;
  (grid.col(0).array() - p.measurement.sensors(0, 0)).abs().minCoeff(&near);
  const Eigen::VectorXd mu = fieldgen::gp_mean(spec, grid);
  Matrix constant(p.n_eval, grid.rows());
  for (int s = 0; s < p.n_eval; ++s) {
    constant.row(s) = mu.transpose().array() + (truth(s, near) - mu(near));
  }
  return {{"lfm", compute_metrics(lfm, truth).to_json()},
          {"vae_prior", compute_metrics(prior, truth).to_json()},
          {"baseline_constant", compute_metrics(constant, truth).to_json()}};
}

json poisson_report(const TrainedModel& m) {
  const Problem& p = m.problem;
  const Matrix grid = p.evaluation_coords(p.eval_grid);
  const Index g = grid.rows();
  const int res = p.config.get_int("data.resolution");
  std::mt19937_64 rng(eval_seed(p));
  Matrix tu(p.n_eval, g), tv(p.n_eval, g);
  for (int s = 0; s < p.n_eval; ++s) {
    const auto sol = fieldgen::poisson_solve(fieldgen::sample_poisson_eps({}, rng), res);
    for (Index k = 0; k < g; ++k) {
      tu(s, k) = sol.u_at(grid(k, 0));
      tv(s, k) = sol.v_at(grid(k, 0));
    }
  }
  const auto lfm = flow::generate_fields(m.velocity, m.vae, p.n_eval, grid,
                                         derive_seed(p.seed, kSampleStream), p.flow_steps);
  const auto prior =
      flow::sample_vae_prior(m.vae, p.n_eval, grid, derive_seed(p.seed, kPriorStream));

  const fieldgen::PoissonSpec ps;
  Eigen::VectorXd analytic_mean(g);
  for (Index k = 0; k < g; ++k) analytic_mean(k) = 1.0 + ps.eps_mean * grid(k, 0) * grid(k, 0);
  const double end2 = grid(g - 1, 0) * grid(g - 1, 0);
  const std::pair<double, double> true_interval{
      1.0 + end2 * (ps.eps_mean - kNormal95 * ps.eps_std),
      1.0 + end2 * (ps.eps_mean + kNormal95 * ps.eps_std)};

  auto inference = [&](const Matrix& v) {
    const Eigen::VectorXd end = v.col(g - 1);
    const std::pair<double, double> gen{quantile(end, 0.05), quantile(end, 0.95)};
    return json{
        {"v_mean_rel_l2", relative_l2(v.colwise().mean().transpose(), analytic_mean)},
        {"v_end_interval", {gen.first, gen.second}},
        {"v_end_true_interval", {true_interval.first, true_interval.second}},
        {"v_end_overlap", interval_overlap(gen, true_interval)},
    };
  };
  return {{"lfm",
           {{"u", compute_metrics(lfm[0], tu).to_json()},
            {"v", compute_metrics(lfm[1], tv).to_json()},
            {"inference", inference(lfm[1])}}},
          {"vae_prior",
           {{"u", compute_metrics(prior[0], tu).to_json()},
            {"v", compute_metrics(prior[1], tv).to_json()},
            {"inference", inference(prior[1])}}}};
}

struct CoherenceCheck {
  double mse = 0.0;          // gamma^2 against Coh
  double mse_squared = 0.0;  // gamma^2 against Coh^2
  Index pairs = 0;
};

/// Welch coherence of every distinct pair of points against the target.
/// `series` is n x (P * N_t), point-major.
CoherenceCheck check_coherence(const Matrix& series, const fieldgen::WindSpec& w,
                               const Matrix& points) {
  const Index nt = w.n_time();
  const auto plan = constraints::make_welch_plan(nt);
  const Eigen::VectorXd freqs = plan.frequencies(w.dt());
  std::vector<Eigen::MatrixXcd> spectra;
  for (Index c = 0; c < points.rows(); ++c) {
    spectra.push_back(constraints::welch_segments(series.middleCols(c * nt, nt), plan));
  }
  CoherenceCheck out;
  double count = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = i + 1; j < points.rows(); ++j) {
      const Eigen::VectorXd g = constraints::coherence_from_segments(spectra[i], spectra[j]);
      for (Index f = 0; f < freqs.size(); ++f) {
        const double coh = fieldgen::coherence_target(w, points.row(i), points.row(j), freqs(f));
        out.mse += (g(f) - coh) * (g(f) - coh);
        out.mse_squared += (g(f) - coh * coh) * (g(f) - coh * coh);
        count += 1.0;
      }
      ++out.pairs;
    }
  }
  out.mse /= count;
  out.mse_squared /= count;
  return out;
}

json coherence_json(const CoherenceCheck& c) {
  return {{"coherence_mse", c.mse}, {"coherence_mse_vs_squared_target", c.mse_squared},
          {"pairs", c.pairs}};
}

json wind_verification_report(const Problem& p) {
  const fieldgen::WindSpec& w = p.wind;
  const Matrix grid = w.grid();
  const int n = p.config.get_int("data.n_samples");
  const fieldgen::SrmSampler sampler(w, grid);
  const Matrix wt = sampler.sample_turbulence(n, derive_seed(p.seed, kDataStream));
  const Index nt = w.n_time();
  double worst_var = 0.0, worst_mean_z = 0.0;
  json points = json::array();
  for (Index c = 0; c < grid.rows(); ++c) {
    const Matrix block = wt.middleCols(c * nt, nt);
    const double target = sampler.spectral_variance(c);
    const double var = (block.array() - block.mean()).square().mean();
    const double rel = std::abs(var / target - 1.0);
    // Per-time-step mean over samples, standardized by its standard error.
    const Eigen::RowVectorXd mean_t = block.colwise().mean();
    const double z = (mean_t.array().abs() / std::sqrt(target / n)).maxCoeff();
    worst_var = std::max(worst_var, rel);
    worst_mean_z = std::max(worst_mean_z, z);
    points.push_back({{"x2", grid(c, 0)}, {"x3", grid(c, 1)}, {"variance", var},
                      {"spectral_variance", target}, {"variance_rel_error", rel}});
  }
  json out = coherence_json(check_coherence(wt, w, grid));
  out["variance_rel_error_max"] = worst_var;
  out["mean_max_standard_errors"] = worst_mean_z;
  out["n_samples"] = n;
  out["points"] = points;
  return out;
}

json wind_desk_report(const TrainedModel& m) {
  const Problem& p = m.problem;
  const fieldgen::WindSpec& w = p.wind;
  const Matrix coords = p.evaluation_coords(p.eval_grid);
  const Matrix truth =
      fieldgen::SrmSampler(w, w.grid()).sample_wind(p.n_eval, eval_seed(p));
  const Matrix lfm = flow::generate_fields(m.velocity, m.vae, p.n_eval, coords,
                                           derive_seed(p.seed, kSampleStream), p.flow_steps)[0];
  const Matrix prior =
      flow::sample_vae_prior(m.vae, p.n_eval, coords, derive_seed(p.seed, kPriorStream))[0];
  auto report = [&](const Matrix& gen) {
    MetricsReport r = compute_metrics(gen, truth);
    r.coherence_mse = check_coherence(gen, w, w.grid()).mse;
    return r.to_json();
  };
  return {{"lfm", report(lfm)}, {"vae_prior", report(prior)},
          {"truth_coherence", coherence_json(check_coherence(truth, w, w.grid()))}};
}

void write_samples(const std::string& path, const Matrix& coords,
                   const std::vector<std::string>& names, const std::vector<Matrix>& fields,
                   Index limit) {
  Dataset d;
  d.header["format"] = "clfm-samples-1";
  d.header["code_version"] = code_version();
  d.coords = coords;
  d.channels = names;
  for (const auto& f : fields) d.values.push_back(f.topRows(std::min(limit, f.rows())));
  write_dataset(path, d);
}

}  // namespace

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void stage_generate(const Config& config) {
  const Problem p = make_problem(config);
  const RunPaths paths = run_paths(config);
  ensure_dir(paths);
  guarded("generate-data", [&] { write_dataset(paths.data(), generate_dataset(p)); });
}

void stage_train_vae(const Config& config) {
  const Problem p = make_problem(config);
  if (!p.trains()) return;
  const RunPaths paths = run_paths(config);
  ensure_dir(paths);
  guarded("train-vae", [&] {
    const Matrix y = load_observations(p, paths);
    TrainedModel m = build_model(p);
    cvae::VaeTrainer trainer(m.vae, p.constraint, p.vae);
    std::ofstream csv(paths.vae_loss());
    trainer.train(y, &csv);
    save_checkpoint(paths.vae_checkpoint(), make_checkpoint(m));
  });
}

void stage_train_flow(const Config& config) {
  const Problem p = make_problem(config);
  if (!p.trains()) return;
  const RunPaths paths = run_paths(config);
  guarded("train-flow", [&] {
    TrainedModel m = model_from_checkpoint(load_checkpoint(paths.vae_checkpoint()));
    const Matrix y = load_observations(p, paths);
    const nets::Posterior post = m.vae.encoder.encode(y);
    flow::FlowTrainer trainer(m.velocity, p.flow);
    std::ofstream csv(paths.flow_loss());
    trainer.train(post.mean.value(), post.stddev.value(), &csv);
    m.has_flow = true;
    save_checkpoint(paths.model_checkpoint(), make_checkpoint(m));
  });
}

json stage_evaluate(const Config& config) {
  const Problem p = make_problem(config);
  const RunPaths paths = run_paths(config);
  ensure_dir(paths);
  return guarded("evaluate", [&] {
    json report;
    report["experiment"] = p.id;
    report["seed"] = p.seed;
    report["eval_seed"] = eval_seed(p);
    if (p.id == "wind_verification") {
      report["generator"] = wind_verification_report(p);
    } else {
      const Checkpoint ckpt = load_checkpoint(paths.model_checkpoint());
      require_architecture(ckpt, architecture_json(p));
      TrainedModel m = model_from_checkpoint(ckpt);
      if (!m.has_flow) throw std::runtime_error("checkpoint has no trained flow");
      m.problem = p;  // evaluation settings come from the current config
      if (p.id == "gp_reconstruction") {
        report["metrics"] = gp_report(m);
      } else if (p.id == "poisson_inference") {
        report["metrics"] = poisson_report(m);
      } else {
        report["metrics"] = wind_desk_report(m);
      }
      const Matrix grid = p.evaluation_coords(p.eval_grid);
      const auto fields = flow::generate_fields(m.velocity, m.vae, std::min(p.n_eval, 200), grid,
                                                derive_seed(p.seed, kSampleStream), p.flow_steps);
      write_samples(paths.samples(), grid, p.fields, fields, 200);
    }
    write_json(paths.metrics(), report);
    return report;
  });
}

std::vector<Matrix> sample_checkpoint(const std::string& path, int n, int grid,
                                      std::uint64_t seed, Matrix* coords) {
  const TrainedModel m = model_from_checkpoint(load_checkpoint(path));
  if (!m.has_flow) throw std::runtime_error("checkpoint '" + path + "' has no trained flow");
  if (n < 0) throw ConfigError("--n must be nonnegative");
  const Matrix c = m.problem.evaluation_coords(grid);
  if (coords) *coords = c;
  return flow::generate_fields(m.velocity, m.vae, n, c, seed, m.problem.flow_steps);
}

json run_experiment(const Config& config) {
  const Problem p = make_problem(config);
  const RunPaths paths = run_paths(config);
  ensure_dir(paths);
  {
    std::ofstream out(paths.config());
    out << config.to_ini();
  }
  stage_generate(config);
  stage_train_vae(config);
  stage_train_flow(config);
  const json report = stage_evaluate(config);

  json artifacts = json::array();
  for (const std::string& f :
       {paths.config(), paths.data(), paths.vae_loss(), paths.vae_checkpoint(),
        paths.flow_loss(), paths.model_checkpoint(), paths.samples(), paths.metrics()}) {
    if (!fs::exists(f)) continue;
    artifacts.push_back({{"path", fs::path(f).filename().string()},
                         {"sha256", sha256_file(f)},
                         {"bytes", fs::file_size(f)}});
  }
  json manifest{{"experiment", p.id},
                {"seed", p.seed},
                {"code_version", code_version()},
                {"config", config.values()},
                {"artifacts", artifacts}};
  write_json(paths.manifest(), manifest);
  return report;
}

std::vector<SweepPoint> run_sweep(const Config& config, const std::string& param,
                                  const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (!config.has(param)) throw ConfigError("unknown sweep parameter '" + param + "'");
  const RunPaths base = run_paths(config);
  ensure_dir(base);
  std::vector<SweepPoint> out;
  for (const auto& v : values) {
    Config c = config;
    c.set(param, v);
    c.set("experiment.output_dir", base.path("sweep/" + param + "=" + v));
    make_problem(c);  // reject bad values before any work
    out.push_back({v, run_experiment(c)});
  }
  std::ofstream csv(base.path("sweep_" + param + ".csv"));
  csv << param << ",mean_mse,covariance_mse,variance_mse,mean_rel_l2,variance_rel_l2\n";
  for (const auto& s : out) {
    const json* lfm = nullptr;
    if (s.metrics.contains("metrics")) {
      const json& mt = s.metrics["metrics"]["lfm"];
      lfm = mt.contains("u") ? &mt["u"] : &mt;
      if (config.experiment() == "poisson_inference") lfm = &mt["v"];
    }
    csv << s.value;
    for (const char* k :
         {"mean_mse", "covariance_mse", "variance_mse", "mean_rel_l2", "variance_rel_l2"}) {
      csv << ',' << (lfm ? fmt((*lfm)[k].get<double>()) : std::string("nan"));
    }
    csv << '\n';
  }
  return out;
}

}  // namespace clfm::harness
