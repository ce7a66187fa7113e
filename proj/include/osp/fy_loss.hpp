#pragma once
// Fenchel-Young surrogate losses S(theta; y) = Omega*(theta) + Omega(y) - <theta, y>
// with Omega = Psi + indicator of conv(Y), the regularized prediction
// yhat(theta) = argmax_{mu in conv(Y)} <theta, mu> - Psi(mu), and a certificate
// expressing yhat as a sparse convex combination of vertices.
//
// Pairings used by the three structures:
//   Multiclass       negative entropy on the simplex        -> softmax
//   MultilabelFixed  0.5 ||.||^2 on the capped simplex      -> Euclidean projection
//   Ranking          (1/zeta) negative entropy on Birkhoff  -> Sinkhorn scaling

#include <vector>

#include "osp/structures.hpp"

namespace osp {

enum class RegularizerKind { NegEntropySimplex, SquaredL2CappedSimplex, NegEntropyBirkhoff };

struct Regularizer {
  RegularizerKind kind;
  double zeta = 1.0;       // entropy scale (Ranking only)
  double lambda = 1.0;     // strong convexity modulus w.r.t. the spec's ground norm
  int sinkhorn_max_iters = 10000;
  double sinkhorn_tol = 1e-10;  // row/col sum tolerance
};

Regularizer default_regularizer(const StructureSpec& spec, double zeta = 1.0);

// Convex combination of vertices; ids are unique and sorted ascending.
struct SparseDistribution {
  std::vector<VertexId> ids;
  std::vector<double> weights;

  double mass() const;
  // Merge duplicates, drop weights < 1e-12, rescale to total `target_mass`.
  void consolidate(double target_mass);
  Vector mean(const StructureSpec& spec) const;
};

struct Prediction {
  Vector yhat;               // point of conv(Y)
  SparseDistribution cert;   // convex decomposition with mean == yhat (tol 1e-7)
};

Prediction regularized_prediction(const StructureSpec& spec, const Regularizer& reg,
                                  const Vector& theta);

// Psi(mu) for mu in conv(Y) (the finite part of Omega).
double psi(const Regularizer& reg, const Vector& mu);

// S(theta; y), computed via the prediction:
// Omega*(theta) = <theta, yhat> - Psi(yhat).
double fy_loss(const StructureSpec& spec, const Regularizer& reg, const Vector& theta,
               VertexId y);
double fy_loss_at(const StructureSpec& spec, const Regularizer& reg, const Vector& theta,
                  VertexId y, const Vector& yhat);

// grad_theta S(theta; y) = yhat(theta) - y.
Vector surrogate_gradient(const StructureSpec& spec, const Regularizer& reg,
                          const Vector& theta, VertexId y);

// Euclidean projection of theta onto {y in [0,1]^d : sum y = m}.
Vector capped_simplex_project(const Vector& theta, int m);

// Greedy Caratheodory decomposition of a point of the capped simplex into
// m-hot vertices. Exact up to floating point; throws NumericError if the
// residual mass exceeds 1e-9.
SparseDistribution caratheodory_capped(const StructureSpec& spec, const Vector& y);

// Sinkhorn scaling of exp(zeta * theta) (reshaped m x m, row-major) to a
// doubly stochastic matrix; switches to log-domain when max |zeta*theta| > 30.
// The result is snapped onto exact unit marginals before it is returned.
Vector sinkhorn(const Vector& theta, int m, double zeta, double tol, int max_iters);

// Birkhoff-von-Neumann decomposition, greedy minimum-positive-entry rule.
// Residual mass below 1e-8 is redistributed proportionally.
SparseDistribution birkhoff_von_neumann(const StructureSpec& spec, const Vector& y);

// Generic away-step Frank-Wolfe solver for the same argmax, using only lmo;
// testing fallback for parity checks. Stops at FW gap <= tol.
Prediction frank_wolfe_prediction(const StructureSpec& spec, const Regularizer& reg,
                                  const Vector& theta, double tol = 1e-7,
                                  int max_iters = 5000);

}  // namespace osp
