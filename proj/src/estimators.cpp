// Inverse-weighted and pseudo-inverse bandit gradient estimators.

#include "osp/estimators.hpp"

namespace osp {

GradientEstimate exact_gradient(const StructureSpec& spec, const DecodeOutcome& outcome,
                                const Vector& x, VertexId y) {
  GradientEstimate e;
  e.g = (outcome.prediction - embed(spec, y)) * x.transpose();
  e.frob_sq = e.g.squaredNorm();
  return e;
}

GradientEstimate inverse_weighted(const StructureSpec& spec, const DecodeOutcome& outcome,
                                  const Vector& x, bool matched) {
  GradientEstimate e;
  if (!matched) {
    e.g = Matrix::Zero(spec.d, x.size());
    e.frob_sq = 0.0;
    return e;
  }
  if (outcome.p_chosen <= 0.0) throw NumericError("matched vertex has zero play probability");
  e.g = ((outcome.prediction - outcome.chosen_embed) / outcome.p_chosen) * x.transpose();
  e.frob_sq = e.g.squaredNorm();
  return e;
}

Vector pseudo_inverse_label(const StructureSpec& spec, const DecodeOutcome& outcome,
                            double loss_value, double pinv_rcond) {
  Matrix p = second_moment(spec, outcome);
  Matrix p_plus = pinv(p, pinv_rcond);
  double inner = loss_value - outcome.chosen_embed.dot(spec.b) - spec.c;
  return v_inverse(spec) * (p_plus * outcome.chosen_embed) * inner;
}

GradientEstimate pseudo_inverse_gradient(const DecodeOutcome& outcome, const Vector& x,
                                         const Vector& ytilde) {
  GradientEstimate e;
  e.g = (outcome.prediction - ytilde) * x.transpose();
  e.frob_sq = e.g.squaredNorm();
  return e;
}

double omega_bound(const StructureSpec& spec) {
  double d = spec.d, m = spec.m;
  switch (spec.kind) {
    case StructureKind::Multiclass:
      return d * d;
    case StructureKind::MultilabelFixed:
      return d * d * d * d * d / (4.0 * m * (d - m));
    case StructureKind::Ranking:
      return m * m * m * m * m;
  }
  throw NumericError("unreachable");
}

}  // namespace osp
