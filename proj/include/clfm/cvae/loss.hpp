#pragma once

#include <functional>
#include <random>
#include <string>

#include "clfm/constraints/statistical.hpp"
#include "clfm/constraints/welch.hpp"
#include "clfm/cvae/model.hpp"

namespace clfm::cvae {

enum class ConstraintKind { none, covariance, correlation, coherence, poisson };

ConstraintKind parse_constraint(const std::string& name);
std::string to_string(ConstraintKind kind);

/// The residual active in one training run and everything needed to evaluate it.
struct ConstraintSpec {
  ConstraintKind kind = ConstraintKind::none;
  int collocation = 50;

  // covariance / correlation: C x d coordinates -> C x C target covariance.
  std::function<Matrix(const Matrix&)> covariance_target;

  // coherence: the decoder's last coordinate is time; collocation points are
  // drawn over the spatial part of the domain and sampled at every time step.
  Eigen::VectorXd times;
  constraints::WelchPlan welch;
  /// (points, pairs, frequencies) -> pairs x bins target coherence.
  std::function<Matrix(const Matrix&, const constraints::PairSet&, const Eigen::VectorXd&)>
      coherence_target;

  // poisson: field 0 is u, field 1 is v.
  double h = 0.0;
  bool boundary = true;
  std::function<double(double)> forcing;

  bool statistical() const {
    return kind == ConstraintKind::covariance || kind == ConstraintKind::correlation ||
           kind == ConstraintKind::coherence;
  }
  bool physical() const { return kind == ConstraintKind::poisson; }
};

struct LossWeights {
  double kl = 1e-6;
  double statistics = 0.0;
  double physics = 0.0;
};

struct VaeLossBreakdown {
  double reconstruction = 0.0;
  double kl = 0.0;
  double statistics_residual = 0.0;
  double physics_residual = 0.0;
  double total = 0.0;
  LossWeights weights;
};

/// Random quantities consumed by one loss evaluation; fixing them makes the
/// loss a deterministic function of the parameters.
struct StepDraws {
  Matrix eps;          // B x d_z
  Matrix collocation;  // C x d (spatial dims only for coherence)
  constraints::PairSet pairs;
};

struct VaeLoss {
  Var total;
  VaeLossBreakdown parts;
};

/// mu + eps * sigma, elementwise.
Var reparameterize(const Var& mean, const Var& stddev, const Matrix& eps);

/// Batch mean of 0.5 sum_i (mu_i^2 + sigma_i^2 - 1 - 2 ln sigma_i).
Var kl_diag_gaussian(const Var& mean, const Var& stddev);
/// Single posterior; throws std::domain_error for sigma <= 0.
double kl_diag_gaussian(const Eigen::VectorXd& mean, const Eigen::VectorXd& stddev);

/// Mean squared error over sensors, channels and batch.
Var reconstruction_loss(const Var& predicted, const Matrix& observed);

/// C i.i.d. uniform points in the box, C x d.
Matrix sample_collocation(int c, const nets::DomainBox& box, std::mt19937_64& rng);

StepDraws draw_step(const VaeModel& model, const ConstraintSpec& constraint, Eigen::Index batch,
                    std::mt19937_64& rng);

/// Coordinates (C * N_t) x (d_s + 1), point-major, for the coherence residual.
Matrix space_time_coords(const Matrix& points, const Eigen::VectorXd& times);

/// Full constrained ELBO-style objective on one batch.
VaeLoss vae_loss(const VaeModel& model, const Matrix& y, const StepDraws& draws,
                 const ConstraintSpec& constraint, const LossWeights& weights);

}  // namespace clfm::cvae
