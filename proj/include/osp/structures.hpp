#pragma once
// Output structures for online structured prediction: the finite label set, its
// vertex embedding into R^d, the affine (SELF) decomposition of the target
// loss, and the combinatorial subroutines (linear maximization, nearest
// vertex, uniform sampling, uniform second moment).
//
// Three structures are provided:
//   Multiclass(d)          one-hot vectors, 0-1 loss, l1 geometry
//   MultilabelFixed(d, m)  m-hot vectors, Hamming/d loss, l2 geometry
//   Ranking(m)             m x m permutation matrices (row-major vec),
//                          1 - (matched rows)/m loss, l1 geometry

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "osp/numerics.hpp"
#include "osp/rng.hpp"

namespace osp {

using VertexId = std::uint64_t;

enum class StructureKind { Multiclass, MultilabelFixed, Ranking };
enum class GroundNorm { L1, L2 };

struct StructureSpec {
  StructureKind kind;
  int d = 0;               // embedding dimension (m*m for Ranking)
  int m = 0;               // subset size / permutation order (0 for Multiclass)
  bool flipped = false;    // MultilabelFixed stored with complemented labels
  std::uint64_t card = 0;  // |Y|
  GroundNorm norm = GroundNorm::L1;
  double nu = 0;     // min pairwise distance in `norm`
  double gamma = 0;  // Lipschitz factor of the loss w.r.t. `norm`
  double kappa = 0;  // ||y||_2 <= kappa * ||y|| for the ground norm
  double diy = 0;    // max(max ||y||_2 over conv, l2 diameter of conv)
  Matrix V;          // SELF: L(y'; y) = <y', V y + b> + c(y)
  Vector b;
  double c = 0;      // c(y) is constant on Y for all three structures
  std::string name;
};

StructureSpec make_multiclass(int d);
// m > d/2 is stored internally as (d, d-m) with complemented labels so that
// |<y', V y>| <= 1 holds; use flip_vertex to map external labels in/out.
StructureSpec make_multilabel(int d, int m);
StructureSpec make_ranking(int m);

// Identity except for flipped MultilabelFixed specs, where it complements the
// m-subset. Involution: flip(flip(v)) = v.
VertexId flip_vertex(const StructureSpec& spec, VertexId v);

Vector embed(const StructureSpec& spec, VertexId v);
VertexId vertex_from_embedding(const StructureSpec& spec, const Vector& y);

// Target loss via the SELF decomposition; y_point may be any point of conv(Y),
// in which case the value is the expected loss of a distribution with that
// mean.
double target_loss(const StructureSpec& spec, const Vector& y_point, VertexId y);
// Direct combinatorial evaluation on a vertex pair (test oracle).
double target_loss_combinatorial(const StructureSpec& spec, VertexId yhat, VertexId y);

// Closed-form inverse of V.
Matrix v_inverse(const StructureSpec& spec);

// E_{y ~ Uniform(Y)}[y y^T], closed form (never enumerates Y).
Matrix second_moment_uniform(const StructureSpec& spec);
// E_{y ~ Uniform(Y)}[y], closed form.
Vector uniform_mean(const StructureSpec& spec);

// argmax_{y in Y} <dir, y>; ties broken toward the smallest VertexId.
VertexId lmo(const StructureSpec& spec, const Vector& dir);

// Nearest vertex to a point of conv(Y) in the spec's ground norm; ties broken
// toward the smallest VertexId. Returns the vertex and the distance.
std::pair<VertexId, double> nearest_vertex(const StructureSpec& spec, const Vector& p);

VertexId sample_uniform(const StructureSpec& spec, Rng& rng);

double norm_of(const StructureSpec& spec, const Vector& v);

// Subset/permutation codecs (lexicographic rank).
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);
std::uint64_t subset_rank(int d, const std::vector<int>& sorted_subset);
std::vector<int> subset_unrank(int d, int m, std::uint64_t rank);
std::uint64_t perm_rank(const std::vector<int>& perm);
std::vector<int> perm_unrank(int m, std::uint64_t rank);

// Min-cost assignment (Jonker-Volgenant style shortest augmenting paths,
// O(m^3)). Returns row -> column.
std::vector<int> hungarian_min(const Matrix& cost);
// Max-weight assignment with ties broken toward the lexicographically
// smallest row -> column word (= smallest permutation VertexId).
std::vector<int> assignment_max_lex(const Matrix& weight);

}  // namespace osp
