#pragma once
// Randomized decoding and its uniform-exploration variant.
//
// randomized_decode: with p = min(1, 2*dist/nu), play the nearest vertex with
// probability 1-p, otherwise a certificate atom (whose conditional mean is the
// regularized prediction).
//
// rdue_decode: with probability q play a uniform vertex, otherwise the
// randomized decode. The uniform component is kept implicit (mass q spread
// over all |Y| vertices) so nothing ever enumerates Y.

#include "osp/fy_loss.hpp"
#include "osp/rng.hpp"
#include "osp/structures.hpp"

namespace osp {

struct DecodeOutcome {
  VertexId chosen = 0;
  double p_chosen = 0.0;       // probability of `chosen` under the full law
  bool explored = false;       // uniform branch taken (rdue only)
  SparseDistribution dist;     // explicit atoms, total mass 1 - uniform_mass
  double uniform_mass = 0.0;   // q, spread uniformly over all card vertices
  Vector prediction;           // regularized prediction yhat(theta)
  Vector chosen_embed;
};

DecodeOutcome randomized_decode(const StructureSpec& spec, const Regularizer& reg,
                                const Vector& theta, Rng& rng);

DecodeOutcome rdue_decode(const StructureSpec& spec, const Regularizer& reg,
                          const Vector& theta, double q, Rng& rng);

// Probability of vertex v under the outcome's law.
double pmf(const StructureSpec& spec, const DecodeOutcome& outcome, VertexId v);

// First moment of the law (exact).
Vector mean_embedding(const StructureSpec& spec, const DecodeOutcome& outcome);

// E[L(.; y)] under the law; exact by affinity of the target loss.
double expected_target_loss(const StructureSpec& spec, const DecodeOutcome& outcome,
                            VertexId y);

// Second moment P = E[y y^T] under the law; uniform part in closed form.
Matrix second_moment(const StructureSpec& spec, const DecodeOutcome& outcome);

// Copy of `outcome` with the chosen vertex replaced (law unchanged); used to
// enumerate estimator expectations exactly.
DecodeOutcome with_chosen(const StructureSpec& spec, const DecodeOutcome& outcome, VertexId v);

}  // namespace osp
