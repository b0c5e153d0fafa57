#include "clfm/cvae/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "clfm/constraints/coherence.hpp"
#include "clfm/constraints/poisson.hpp"

namespace clfm::cvae {

using Eigen::Index;

ConstraintKind parse_constraint(const std::string& name) {
  if (name == "none") return ConstraintKind::none;
  if (name == "covariance") return ConstraintKind::covariance;
  if (name == "correlation") return ConstraintKind::correlation;
  if (name == "coherence") return ConstraintKind::coherence;
  if (name == "poisson") return ConstraintKind::poisson;
  throw std::invalid_argument("unknown constraint kind '" + name + "'");
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::none: return "none";
    case ConstraintKind::covariance: return "covariance";
    case ConstraintKind::correlation: return "correlation";
    case ConstraintKind::coherence: return "coherence";
    case ConstraintKind::poisson: return "poisson";
  }
  return "?";
}

Var reparameterize(const Var& mean, const Var& stddev, const Matrix& eps) {
  if (mean.rows() != eps.rows() || mean.cols() != eps.cols() || stddev.rows() != eps.rows() ||
      stddev.cols() != eps.cols()) {
    throw ad::ShapeError("reparameterize", "mean, stddev and noise shapes differ");
  }
  return ad::add(mean, ad::mul(Var::constant(eps), stddev));
}

Var kl_diag_gaussian(const Var& mean, const Var& stddev) {
  const Var per = ad::sub(ad::add(ad::square(mean), ad::square(stddev)),
                          ad::add_scalar(ad::scale(ad::log(stddev), 2.0), 1.0));
  return ad::scale(ad::sum(per), 0.5 / static_cast<double>(mean.rows()));
}

double kl_diag_gaussian(const Eigen::VectorXd& mean, const Eigen::VectorXd& stddev) {
  if (mean.size() != stddev.size()) throw std::invalid_argument("kl: size mismatch");
  if ((stddev.array() <= 0.0).any()) throw std::domain_error("kl: non-positive stddev");
  return 0.5 * (mean.array().square() + stddev.array().square() - 1.0 -
                2.0 * stddev.array().log())
                   .sum();
}

Var reconstruction_loss(const Var& predicted, const Matrix& observed) {
  if (predicted.rows() != observed.rows() || predicted.cols() != observed.cols()) {
    throw ad::ShapeError("reconstruction_loss",
                         "decoded " + std::to_string(predicted.rows()) + "x" +
                             std::to_string(predicted.cols()) + " vs observed " +
                             std::to_string(observed.rows()) + "x" +
                             std::to_string(observed.cols()));
  }
  return ad::mean(ad::square(ad::sub(predicted, Var::constant(observed))));
}

Matrix sample_collocation(int c, const nets::DomainBox& box, std::mt19937_64& rng) {
  if (c < 1) throw std::invalid_argument("sample_collocation: C must be at least 1");
  if (box.dim() < 1) throw std::invalid_argument("sample_collocation: empty domain");
  for (int k = 0; k < box.dim(); ++k) {
    if (!(box.hi(k) > box.lo(k))) throw std::invalid_argument("sample_collocation: empty domain");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix x(c, box.dim());
  for (int i = 0; i < c; ++i) {
    for (int k = 0; k < box.dim(); ++k) {
      x(i, k) = box.lo(k) + (box.hi(k) - box.lo(k)) * unit(rng);
    }
  }
  return x;
}

namespace {

nets::DomainBox spatial_part(const nets::DomainBox& box) {
  nets::DomainBox s;
  s.lo = box.lo.head(box.dim() - 1);
  s.hi = box.hi.head(box.dim() - 1);
  return s;
}

constraints::PairSet coherence_pairs(int c, std::mt19937_64& rng) {
  if (c < 2) throw std::invalid_argument("coherence constraint needs at least 2 points");
  if (c * (c - 1) / 2 <= constraints::kRandomPairBudget) return constraints::distinct_pairs(c);
  std::uniform_int_distribution<Index> pick(0, c - 1);
  constraints::PairSet p;
  while (p.size() < static_cast<std::size_t>(constraints::kRandomPairBudget)) {
    Index i = pick(rng), j = pick(rng);
    if (i == j) continue;
    if (i > j) std::swap(i, j);
    p.first.push_back(i);
    p.second.push_back(j);
  }
  return p;
}

}  // namespace

Matrix space_time_coords(const Matrix& points, const Eigen::VectorXd& times) {
  const Index nt = times.size();
  Matrix coords(points.rows() * nt, points.cols() + 1);
  for (Index c = 0; c < points.rows(); ++c) {
    for (Index k = 0; k < nt; ++k) {
      coords.row(c * nt + k) << points.row(c), times(k);
    }
  }
  return coords;
}

StepDraws draw_step(const VaeModel& model, const ConstraintSpec& constraint, Index batch,
                    std::mt19937_64& rng) {
  StepDraws d;
  std::normal_distribution<double> normal;
  d.eps.resize(batch, model.latent_dim());
  for (Index i = 0; i < batch; ++i) {
    for (Index k = 0; k < d.eps.cols(); ++k) d.eps(i, k) = normal(rng);
  }
  switch (constraint.kind) {
    case ConstraintKind::none:
      break;
    case ConstraintKind::covariance:
    case ConstraintKind::correlation:
      d.collocation = sample_collocation(constraint.collocation, model.box, rng);
      d.pairs = constraints::select_pairs(constraint.collocation, rng);
      break;
    case ConstraintKind::coherence:
      d.collocation = sample_collocation(constraint.collocation, spatial_part(model.box), rng);
      d.pairs = coherence_pairs(constraint.collocation, rng);
      break;
    case ConstraintKind::poisson:
      d.collocation = sample_collocation(constraint.collocation, model.box, rng);
      break;
  }
  return d;
}

VaeLoss vae_loss(const VaeModel& model, const Matrix& y, const StepDraws& draws,
                 const ConstraintSpec& constraint, const LossWeights& weights) {
  if (y.rows() < 1) throw std::invalid_argument("vae_loss: empty batch");
  if (weights.kl < 0.0 || weights.statistics < 0.0 || weights.physics < 0.0) {
    throw std::invalid_argument("vae_loss: loss weights must be nonnegative");
  }
  const nets::Posterior post = model.encoder.encode(y);
  const Var z = reparameterize(post.mean, post.stddev, draws.eps);

  // Branch features depend only on z; compute each decoder's once per step.
  std::vector<Var> branch(model.decoders.size());
  auto decode = [&](int f, const Matrix& x) {
    if (!branch[f].defined()) branch[f] = model.decoders[f].branch_features(z);
    return model.decoders[f].decode_features(branch[f], x);
  };

  const Var recon =
      reconstruction_loss(model.measurement.apply(decode, model.decoders.size()), y);
  const Var kl = kl_diag_gaussian(post.mean, post.stddev);
  Var stat = Var::scalar(0.0);
  Var phys = Var::scalar(0.0);

  switch (constraint.kind) {
    case ConstraintKind::none:
      break;
    case ConstraintKind::covariance:
    case ConstraintKind::correlation: {
      const Var u = decode(0, draws.collocation);
      const Matrix target = constraint.covariance_target(draws.collocation);
      stat = constraint.kind == ConstraintKind::covariance
                 ? constraints::covariance_residual(u, target, draws.pairs)
                 : constraints::correlation_residual(u, target, draws.pairs);
      break;
    }
    case ConstraintKind::coherence: {
      const Matrix coords = space_time_coords(draws.collocation, constraint.times);
      const Var series = decode(0, coords);
      const Eigen::VectorXd freqs =
          constraint.welch.frequencies(constraint.times(1) - constraint.times(0));
      const Matrix target = constraint.coherence_target(draws.collocation, draws.pairs, freqs);
      stat = constraints::coherence_residual(series, draws.collocation.rows(), draws.pairs,
                                             target, constraint.welch);
      break;
    }
    case ConstraintKind::poisson: {
      if (model.decoders.size() < 2) {
        throw std::invalid_argument("poisson constraint needs decoders for u and v");
      }
      constraints::PoissonResidualOptions opt;
      opt.lo = model.box.lo(0);
      opt.hi = model.box.hi(0);
      opt.h = constraint.h;
      opt.boundary = constraint.boundary;
      opt.forcing = constraint.forcing;
      phys = constraints::poisson_physics_residual(
                 [&](const Matrix& x) { return decode(0, x); },
                 [&](const Matrix& x) { return decode(1, x); }, draws.collocation.col(0), opt)
                 .total;
      break;
    }
  }

  VaeLoss out;
  out.total = ad::add(ad::add(recon, ad::scale(kl, weights.kl)),
                      ad::add(ad::scale(stat, weights.statistics),
                              ad::scale(phys, weights.physics)));
  out.parts.reconstruction = recon.item();
  out.parts.kl = kl.item();
  out.parts.statistics_residual = stat.item();
  out.parts.physics_residual = phys.item();
  out.parts.weights = weights;
  out.parts.total = out.parts.reconstruction + weights.kl * out.parts.kl +
                    weights.statistics * out.parts.statistics_residual +
                    weights.physics * out.parts.physics_residual;
  return out;
}

}  // namespace clfm::cvae
