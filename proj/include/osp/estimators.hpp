#pragma once
// Bandit gradient estimators. Both reconstruct G_t = (yhat(theta_t) - y_t) x_t^T
// in expectation from single-point feedback about the played vertex.
//
//   inverse_weighted:  needs the indicator 1[played == y_t]; importance-weights
//                      the exact gradient by 1/p(played).
//   pseudo_inverse:    needs the loss value L(played; y_t); recovers a label
//                      estimate ytilde with E[ytilde] = y_t through the
//                      pseudo-inverse of the play distribution's second moment.

#include "osp/decoding.hpp"
#include "osp/structures.hpp"

namespace osp {

enum class FeedbackKind { Label, Indicator, LossValue };

struct BanditFeedback {
  FeedbackKind kind;
  VertexId label = 0;     // Label (full information)
  bool matched = false;   // Indicator
  double loss = 0.0;      // LossValue
};

struct GradientEstimate {
  Matrix g;
  double frob_sq = 0.0;
};

GradientEstimate exact_gradient(const StructureSpec& spec, const DecodeOutcome& outcome,
                                const Vector& x, VertexId y);

GradientEstimate inverse_weighted(const StructureSpec& spec, const DecodeOutcome& outcome,
                                  const Vector& x, bool matched);

// Label estimate ytilde = V^{-1} P^+ yplayed * (loss - <yplayed, b> - c).
Vector pseudo_inverse_label(const StructureSpec& spec, const DecodeOutcome& outcome,
                            double loss_value, double pinv_rcond = 1e-10);

GradientEstimate pseudo_inverse_gradient(const DecodeOutcome& outcome, const Vector& x,
                                         const Vector& ytilde);

// Corollary bound omega >= tr(V^{-1} Q^+ V^{-T}): d^2 (Multiclass),
// d^5 / (4 m (d-m)) (MultilabelFixed), m^5 (Ranking).
double omega_bound(const StructureSpec& spec);

}  // namespace osp
