#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clfm/fieldgen/gp.hpp"
#include "clfm/fieldgen/kernels.hpp"
#include "clfm/harness/checkpoint.hpp"
#include "clfm/harness/config.hpp"
#include "clfm/harness/dataset.hpp"
#include "clfm/harness/digest.hpp"
#include "clfm/harness/experiment.hpp"
#include "clfm/harness/metrics.hpp"

namespace fs = std::filesystem;
using namespace clfm;
using namespace clfm::harness;
using ad::Matrix;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "clfm_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A deliberately small configuration so checkpoints stay quick to build.
Config small_config(const std::string& id = "gp_reconstruction") {
  Config c = Config::defaults(id);
  c.set("network.encoder_width", "16");
  c.set("network.branch_width", "16");
  c.set("network.trunk_width", "16");
  c.set("network.width_p", "8");
  c.set("flow.width", "16");
  c.set("flow.steps", "10");
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("sections and keys override defaults") {
    std::istringstream in("[experiment]\nid = poisson_inference\nseed = 42\n[vae]\nepochs = 7\n");
    const Config c = Config::parse(in);
    CHECK(c.experiment() == "poisson_inference");
    CHECK(c.get_seed("experiment.seed") == 42);
    CHECK(c.get_int("vae.epochs") == 7);
    CHECK(c.get_int("data.sensors") == 25);
    CHECK(c.get_double("vae.lambda_f") == 0.001);
  }
  SUBCASE("demo defaults") {
    const Config c = Config::defaults("gp_reconstruction");
    CHECK(c.get_int("data.sensors") == 3);
    CHECK(c.get_int("data.n_samples") == 1000);
    CHECK(c.get_double("vae.lambda_r") == 0.1);
    CHECK(c.get_int("constraint.collocation") == 50);
    CHECK(c.get_int("vae.epochs") == 2000);
    CHECK(c.get_int("flow.epochs") == 500);
  }
  SUBCASE("errors") {
    std::istringstream unknown("[vae]\nepochz = 3\n");
    CHECK_THROWS_AS(Config::parse(unknown), ConfigError);
    std::istringstream bad_id("[experiment]\nid = nope\n");
    CHECK_THROWS_AS(Config::parse(bad_id), ConfigError);
    std::istringstream garbage("[vae\nepochs = 3\n");
    CHECK_THROWS_AS(Config::parse(garbage), ConfigError);
    Config c = Config::defaults("gp_reconstruction");
    c.set("vae.epochs", "ten");
    CHECK_THROWS_AS(c.get_int("vae.epochs"), ConfigError);
    CHECK_THROWS_AS(c.set("experiment.id", "wind_desk"), ConfigError);
    CHECK_THROWS_AS(Config::load("/nonexistent/config.ini"), ConfigError);
  }
  SUBCASE("resolved values survive an INI round trip") {
    Config c = Config::defaults("wind_desk");
    c.set("experiment.seed", "99");
    std::istringstream in(c.to_ini());
    CHECK(Config::parse(in).values() == c.values());
  }
  SUBCASE("problem validation") {
    Config c = Config::defaults("gp_reconstruction");
    c.set("vae.lambda_f", "0.1");
    CHECK_THROWS_AS(make_problem(c), ConfigError);
    c = Config::defaults("gp_reconstruction");
    c.set("constraint.kind", "poisson");
    CHECK_THROWS_AS(make_problem(c), ConfigError);
    c = Config::defaults("gp_reconstruction");
    c.set("data.sensors", "0");
    CHECK_THROWS_AS(make_problem(c), ConfigError);
    c = Config::defaults("wind_desk");
    c.set("data.n_freq", "48");
    CHECK_THROWS_AS(make_problem(c), ConfigError);
    c = Config::defaults("wind_desk");
    c.set("constraint.coherence_target", "coh_cubed");
    CHECK_THROWS_AS(make_problem(c), ConfigError);
  }
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, kDataStream) == derive_seed(1, kDataStream));
  CHECK(derive_seed(1, kDataStream) != derive_seed(1, kEvalStream));
  CHECK(derive_seed(1, kDataStream) != derive_seed(2, kDataStream));
}

TEST_CASE("sha256 digests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(from_hex(to_hex("\x01\xff z")) == "\x01\xff z");
  CHECK_THROWS_AS(from_hex("abc"), std::invalid_argument);
  CHECK_THROWS_AS(from_hex("zz"), std::invalid_argument);
}

TEST_CASE("metrics") {
  const Matrix grid = fieldgen::linspace_column(0.0, 1.0, 100);
  const Matrix truth = fieldgen::gp_sample(fieldgen::GpSpec{}, grid, 1000, 1);

  SUBCASE("identical sets") {
    const MetricsReport r = compute_metrics(truth, truth);
    CHECK(r.mean_mse == 0.0);
    CHECK(r.covariance_mse == 0.0);
    CHECK(r.variance_mse == 0.0);
    CHECK(r.mean_rel_l2 == 0.0);
  }
  SUBCASE("constant shift moves only the mean") {
    const MetricsReport r = compute_metrics(truth.array() + 0.1, truth);
    CHECK(r.mean_mse == doctest::Approx(0.01));
    CHECK(r.covariance_mse < 1e-24);
    CHECK(r.variance_mse < 1e-24);
  }
  SUBCASE("independent draws sit at the noise floor") {
    const Matrix other = fieldgen::gp_sample(fieldgen::GpSpec{}, grid, 1000, 2);
    const MetricsReport r = compute_metrics(other, truth);
    CHECK(r.mean_mse < 0.01);
    const MetricsReport s = compute_metrics(truth, other);
    CHECK(s.mean_mse == r.mean_mse);
    CHECK(s.covariance_mse == r.covariance_mse);
    CHECK(s.variance_mse == r.variance_mse);
  }
  SUBCASE("sample covariance is unbiased") {
    const Matrix x = (Matrix(3, 1) << 1.0, 2.0, 3.0).finished();
    CHECK(sample_covariance(x)(0, 0) == doctest::Approx(1.0));
    CHECK_THROWS(compute_metrics(x.topRows(1), x));
  }
  SUBCASE("quantiles and interval overlap") {
    const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(11, 0.0, 10.0);
    CHECK(quantile(v, 0.5) == doctest::Approx(5.0));
    CHECK(quantile(v, 0.05) == doctest::Approx(0.5));
    CHECK(interval_overlap({0.0, 2.0}, {1.0, 3.0}) == doctest::Approx(0.5));
    CHECK(interval_overlap({0.0, 1.0}, {2.0, 3.0}) == 0.0);
    CHECK(interval_overlap({0.0, 10.0}, {2.0, 3.0}) == doctest::Approx(1.0));
    CHECK(relative_l2(Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 0) + Eigen::Vector2d(3, 4)) == 0.0);
  }
}

TEST_CASE("dataset files") {
  const fs::path dir = scratch("dataset");
  Dataset d;
  d.header["experiment"] = "gp_reconstruction";
  d.coords = (Matrix(2, 1) << 0.25, 0.75).finished();
  d.channels = {"u"};
  d.values = {(Matrix(3, 2) << 1.0 / 3.0, 2, 3, 4, 5, -6e-300).finished()};
  write_dataset((dir / "d.csv").string(), d);
  const Dataset back = read_dataset((dir / "d.csv").string());
  CHECK(back.coords == d.coords);
  CHECK(back.values[0] == d.values[0]);
  CHECK(back.header.at("experiment") == "gp_reconstruction");
  CHECK(back.observations() == d.values[0]);
}

TEST_CASE("checkpoints") {
  const fs::path dir = scratch("checkpoint");
  const Problem p = make_problem(small_config());
  TrainedModel m = build_model(p);
  m.has_flow = true;
  const std::string path = (dir / "model.ckpt").string();
  save_checkpoint(path, make_checkpoint(m));

  SUBCASE("round trip decodes identically") {
    const TrainedModel back = model_from_checkpoint(load_checkpoint(path));
    const Matrix probe = fieldgen::linspace_column(0.0, 1.0, 37);
    const Matrix z = Matrix::Random(5, 4);
    CHECK(back.vae.decode_all(z, probe)[0] == m.vae.decode_all(z, probe)[0]);
    CHECK(back.velocity.evaluate(z, 0.4) == m.velocity.evaluate(z, 0.4));
    const auto pa = m.parameters();
    const auto pb = back.parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i].var.value() == pb[i].var.value());
  }
  SUBCASE("truncation is a digest error") {
    std::string text;
    {
      std::ifstream in(path);
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    const std::string cut = (dir / "cut.ckpt").string();
    std::ofstream(cut) << text.substr(0, text.size() / 2);
    CHECK_THROWS_AS(load_checkpoint(cut), DigestError);

    std::string flipped = text;
    flipped[flipped.size() / 2] = flipped[flipped.size() / 2] == '0' ? '1' : '0';
    const std::string bad = (dir / "bad.ckpt").string();
    std::ofstream(bad) << flipped;
    CHECK_THROWS_AS(load_checkpoint(bad), DigestError);
  }
  SUBCASE("cross-config load is an architecture mismatch") {
    Config other = small_config();
    other.set("network.latent_dim", "6");
    CHECK_THROWS_AS(require_architecture(load_checkpoint(path),
                                         architecture_json(make_problem(other))),
                    CheckpointMismatch);
    CHECK_NOTHROW(require_architecture(load_checkpoint(path), architecture_json(p)));
  }
  SUBCASE("sampling from a checkpoint") {
    CHECK(sample_checkpoint(path, 0, 20, 1)[0].rows() == 0);
    const Matrix a = sample_checkpoint(path, 4, 20, 3)[0];
    CHECK(a.rows() == 4);
    CHECK(a.cols() == 20);
    CHECK(a == sample_checkpoint(path, 4, 20, 3)[0]);
  }
  SUBCASE("matrix hex encoding is exact") {
    const Matrix x = (Matrix(2, 2) << 1.0 / 3.0, -0.0, 1e-310, -7.5e200).finished();
    const Matrix y = decode_matrix(encode_matrix(x), 2, 2);
    CHECK(std::memcmp(x.data(), y.data(), sizeof(double) * 4) == 0);
  }
}

TEST_CASE("pipeline stages and manifest") {
  const fs::path dir = scratch("pipeline");
  Config c = small_config();
  c.set("experiment.output_dir", (dir / "run").string());
  c.set("data.n_samples", "64");
  c.set("vae.epochs", "3");
  c.set("flow.epochs", "2");
  c.set("experiment.n_eval_samples", "50");
  c.set("experiment.eval_grid", "20");
  const nlohmann::json report = run_experiment(c);
  const RunPaths paths = run_paths(c);
  CHECK(report.contains("metrics"));
  nlohmann::json manifest;
  std::ifstream(paths.manifest()) >> manifest;
  for (const std::string& f : {paths.config(), paths.data(), paths.vae_loss(),
                               paths.model_checkpoint(), paths.metrics(), paths.samples(),
                               paths.manifest()}) {
    CHECK(fs::exists(f));
  }
  bool listed_metrics = false;
  for (const auto& a : manifest.at("artifacts")) {
    if (a.at("path") == "metrics.json") {
      listed_metrics = true;
      CHECK(a.at("sha256") == sha256_file(paths.metrics()));
    }
  }
  CHECK(listed_metrics);

  SUBCASE("evaluation refuses a checkpoint from another architecture") {
    Config other = c;
    other.set("network.width_p", "12");
    CHECK_THROWS_AS(stage_evaluate(other), StageError);
  }
  SUBCASE("a stage without its inputs names itself") {
    Config fresh = c;
    fresh.set("experiment.output_dir", (dir / "empty").string());
    try {
      stage_train_vae(fresh);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "train-vae");
    }
  }
}
