// Randomized decoding (nearest vertex vs certificate atom) and RDUE.

#include "osp/decoding.hpp"

#include <algorithm>
#include <cmath>

namespace osp {

namespace {

VertexId sample_atoms(const SparseDistribution& dist, double mass, Rng& rng) {
  double u = rng.next_double() * mass;
  double acc = 0.0;
  for (size_t i = 0; i < dist.ids.size(); ++i) {
    acc += dist.weights[i];
    if (u < acc) return dist.ids[i];
  }
  return dist.ids.back();
}

}  // namespace

DecodeOutcome randomized_decode(const StructureSpec& spec, const Regularizer& reg,
                                const Vector& theta, Rng& rng) {
  Prediction pred = regularized_prediction(spec, reg, theta);
  auto [star, dist_star] = nearest_vertex(spec, pred.yhat);
  double p = std::min(1.0, 2.0 * dist_star / spec.nu);

  DecodeOutcome out;
  out.prediction = pred.yhat;
  out.uniform_mass = 0.0;
  out.dist.ids.push_back(star);
  out.dist.weights.push_back(1.0 - p);
  for (size_t i = 0; i < pred.cert.ids.size(); ++i) {
    out.dist.ids.push_back(pred.cert.ids[i]);
    out.dist.weights.push_back(p * pred.cert.weights[i]);
  }
  out.dist.consolidate(1.0);

  bool z = rng.bernoulli(p);
  out.chosen = z ? sample_atoms(pred.cert, pred.cert.mass(), rng) : star;
  out.chosen_embed = embed(spec, out.chosen);
  out.p_chosen = pmf(spec, out, out.chosen);
  out.explored = false;
  return out;
}

DecodeOutcome rdue_decode(const StructureSpec& spec, const Regularizer& reg,
                          const Vector& theta, double q, Rng& rng) {
  if (q < 0.0 || q > 1.0) throw ConfigError("exploration rate q must lie in [0, 1]");
  bool x = rng.bernoulli(q);
  DecodeOutcome out = randomized_decode(spec, reg, theta, rng);
  for (double& w : out.dist.weights) w *= (1.0 - q);
  out.uniform_mass = q;
  if (x) {
    out.chosen = sample_uniform(spec, rng);
    out.chosen_embed = embed(spec, out.chosen);
  }
  out.explored = x;
  out.p_chosen = pmf(spec, out, out.chosen);
  return out;
}

double pmf(const StructureSpec& spec, const DecodeOutcome& outcome, VertexId v) {
  double p = outcome.uniform_mass / static_cast<double>(spec.card);
  auto it = std::lower_bound(outcome.dist.ids.begin(), outcome.dist.ids.end(), v);
  if (it != outcome.dist.ids.end() && *it == v)
    p += outcome.dist.weights[static_cast<size_t>(it - outcome.dist.ids.begin())];
  return p;
}

Vector mean_embedding(const StructureSpec& spec, const DecodeOutcome& outcome) {
  Vector m = outcome.dist.mean(spec);
  if (outcome.uniform_mass > 0.0) m += outcome.uniform_mass * uniform_mean(spec);
  return m;
}

double expected_target_loss(const StructureSpec& spec, const DecodeOutcome& outcome,
                            VertexId y) {
  return target_loss(spec, mean_embedding(spec, outcome), y);
}

Matrix second_moment(const StructureSpec& spec, const DecodeOutcome& outcome) {
  Matrix p = Matrix::Zero(spec.d, spec.d);
  if (outcome.uniform_mass > 0.0) p = outcome.uniform_mass * second_moment_uniform(spec);
  for (size_t i = 0; i < outcome.dist.ids.size(); ++i) {
    Vector y = embed(spec, outcome.dist.ids[i]);
    p.noalias() += outcome.dist.weights[i] * (y * y.transpose());
  }
  return p;
}

DecodeOutcome with_chosen(const StructureSpec& spec, const DecodeOutcome& outcome,
                          VertexId v) {
  DecodeOutcome out = outcome;
  out.chosen = v;
  out.chosen_embed = embed(spec, v);
  out.p_chosen = pmf(spec, out, v);
  return out;
}

}  // namespace osp
