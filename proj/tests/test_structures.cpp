#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "osp/rng.hpp"
#include "osp/structures.hpp"

using namespace osp;

namespace {

std::vector<StructureSpec> small_specs() {
  return {make_multiclass(3), make_multiclass(5), make_multilabel(5, 2),
          make_multilabel(6, 4), make_ranking(3)};
}

}  // namespace

TEST_CASE("binomial values") {
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(6, 3) == 20);
  CHECK(binomial(5, 6) == 0);
  CHECK(binomial(52, 5) == 2598960);
}

TEST_CASE("subset codec round-trips in lexicographic order") {
  const int d = 6, m = 3;
  std::vector<int> prev;
  for (std::uint64_t r = 0; r < binomial(d, m); ++r) {
    auto s = subset_unrank(d, m, r);
    REQUIRE(static_cast<int>(s.size()) == m);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(subset_rank(d, s) == r);
    if (r > 0) CHECK(std::lexicographical_compare(prev.begin(), prev.end(), s.begin(), s.end()));
    prev = s;
  }
}

TEST_CASE("permutation codec round-trips with known endpoints") {
  CHECK(perm_rank({0, 1, 2, 3}) == 0);
  CHECK(perm_rank({3, 2, 1, 0}) == 23);
  for (std::uint64_t r = 0; r < 24; ++r) CHECK(perm_rank(perm_unrank(4, r)) == r);
}

TEST_CASE("spec constants match enumeration oracles") {
  for (const auto& spec : small_specs()) {
    CAPTURE(spec.name);
    std::vector<Vector> ys;
    for (VertexId v = 0; v < spec.card; ++v) ys.push_back(embed(spec, v));

    // nu: minimum pairwise distance in the ground norm.
    // diy: max vertex l2 norm vs pairwise l2 diameter, whichever is larger.
    // gamma: smallest Lipschitz factor of the loss w.r.t. the ground norm.
    double min_dist = 1e300, max_l2 = 0.0, diam = 0.0, max_ratio = 0.0;
    for (size_t i = 0; i < ys.size(); ++i) {
      max_l2 = std::max(max_l2, ys[i].norm());
      for (size_t j = 0; j < ys.size(); ++j) {
        if (i == j) continue;
        double dist = norm_of(spec, ys[i] - ys[j]);
        min_dist = std::min(min_dist, dist);
        diam = std::max(diam, (ys[i] - ys[j]).norm());
        double loss = target_loss_combinatorial(spec, static_cast<VertexId>(i),
                                                static_cast<VertexId>(j));
        max_ratio = std::max(max_ratio, loss / dist);
      }
    }
    CHECK(spec.nu == doctest::Approx(min_dist).epsilon(1e-12));
    CHECK(spec.diy == doctest::Approx(std::max(max_l2, diam)).epsilon(1e-12));
    CHECK(max_ratio <= spec.gamma + 1e-12);
    if (spec.kind != StructureKind::MultilabelFixed)
      CHECK(max_ratio == doctest::Approx(spec.gamma).epsilon(1e-12));

    // kappa: l2 vs ground norm, on vertices and their differences.
    for (size_t i = 0; i < ys.size(); ++i) {
      CHECK(ys[i].norm() <= spec.kappa * norm_of(spec, ys[i]) + 1e-12);
      for (size_t j = 0; j < ys.size(); ++j)
        CHECK((ys[i] - ys[j]).norm() <= spec.kappa * norm_of(spec, ys[i] - ys[j]) + 1e-12);
    }
  }
}

TEST_CASE("affine decomposition reproduces the combinatorial loss") {
  for (const auto& spec : small_specs()) {
    CAPTURE(spec.name);
    for (VertexId a = 0; a < spec.card; ++a)
      for (VertexId b = 0; b < spec.card; ++b)
        CHECK(target_loss(spec, embed(spec, a), b) ==
              doctest::Approx(target_loss_combinatorial(spec, a, b)).epsilon(1e-12));
  }
}

TEST_CASE("target loss is affine in the played point") {
  for (const auto& spec : small_specs()) {
    Vector y0 = embed(spec, 0), y1 = embed(spec, spec.card - 1);
    for (double alpha : {0.25, 0.5, 0.9}) {
      Vector mix = alpha * y0 + (1 - alpha) * y1;
      double expect = alpha * target_loss(spec, y0, 1) + (1 - alpha) * target_loss(spec, y1, 1);
      CHECK(target_loss(spec, mix, 1) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("loss range and identity") {
  for (const auto& spec : small_specs()) {
    for (VertexId a = 0; a < spec.card; ++a)
      for (VertexId b = 0; b < spec.card; ++b) {
        double l = target_loss_combinatorial(spec, a, b);
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
        if (a == b) CHECK(l == 0.0);
        else CHECK(l > 0.0);
      }
  }
}

TEST_CASE("v_inverse inverts V") {
  for (const auto& spec : small_specs()) {
    Matrix prod = spec.V * v_inverse(spec);
    CHECK((prod - Matrix::Identity(spec.d, spec.d)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("uniform moments match enumeration") {
  for (const auto& spec : small_specs()) {
    CAPTURE(spec.name);
    Matrix q = Matrix::Zero(spec.d, spec.d);
    Vector mu = Vector::Zero(spec.d);
    for (VertexId v = 0; v < spec.card; ++v) {
      Vector y = embed(spec, v);
      q += y * y.transpose() / static_cast<double>(spec.card);
      mu += y / static_cast<double>(spec.card);
    }
    CHECK((second_moment_uniform(spec) - q).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((uniform_mean(spec) - mu).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("embedding codec round-trips") {
  for (const auto& spec : small_specs())
    for (VertexId v = 0; v < spec.card; ++v)
      CHECK(vertex_from_embedding(spec, embed(spec, v)) == v);
}

TEST_CASE("lmo matches brute force with smallest-id ties") {
  Rng rng(31);
  for (const auto& spec : small_specs()) {
    CAPTURE(spec.name);
    for (int trial = 0; trial < 30; ++trial) {
      Vector dir(spec.d);
      for (int i = 0; i < spec.d; ++i) dir(i) = rng.next_double(-1.0, 1.0);
      if (trial % 3 == 0) dir.setZero();                    // full tie
      if (trial % 3 == 1) dir = dir.array().round().matrix();  // many ties
      VertexId got = lmo(spec, dir);
      double best = -1e300;
      for (VertexId v = 0; v < spec.card; ++v)
        best = std::max(best, dir.dot(embed(spec, v)));
      CHECK(std::abs(dir.dot(embed(spec, got)) - best) < 1e-9);
      if (trial % 3 == 0) CHECK(got == 0);  // zero direction: smallest id wins
    }
  }
}

TEST_CASE("nearest_vertex matches brute force") {
  Rng rng(37);
  for (const auto& spec : small_specs()) {
    CAPTURE(spec.name);
    for (int trial = 0; trial < 20; ++trial) {
      // Random point of conv(Y): mixture of three vertices.
      Vector p = Vector::Zero(spec.d);
      double wsum = 0.0;
      for (int k = 0; k < 3; ++k) {
        double w = rng.next_double() + 0.1;
        p += w * embed(spec, rng.next_below(spec.card));
        wsum += w;
      }
      p /= wsum;
      auto [v, dist] = nearest_vertex(spec, p);
      double best = 1e300;
      for (VertexId u = 0; u < spec.card; ++u)
        best = std::min(best, norm_of(spec, embed(spec, u) - p));
      CHECK(dist == doctest::Approx(best).epsilon(1e-9));
      CHECK(norm_of(spec, embed(spec, v) - p) == doctest::Approx(dist).epsilon(1e-12));
    }
    // At a vertex the distance is zero and the id is recovered.
    auto [v0, d0] = nearest_vertex(spec, embed(spec, spec.card - 1));
    CHECK(v0 == spec.card - 1);
    CHECK(d0 == doctest::Approx(0.0));
  }
}

TEST_CASE("sample_uniform covers the label set uniformly") {
  for (const auto& spec : {make_multiclass(3), make_multilabel(4, 2), make_ranking(3)}) {
    CAPTURE(spec.name);
    Rng rng(41);
    std::vector<int> hits(spec.card, 0);
    const int n = 6000;
    for (int i = 0; i < n; ++i) {
      VertexId v = sample_uniform(spec, rng);
      REQUIRE(v < spec.card);
      ++hits[static_cast<size_t>(v)];
    }
    double expect = static_cast<double>(n) / static_cast<double>(spec.card);
    for (int h : hits) CHECK(std::abs(h - expect) < 5.0 * std::sqrt(expect));
  }
}

TEST_CASE("large label sets store the complement") {
  StructureSpec spec = make_multilabel(5, 3);
  CHECK(spec.flipped);
  CHECK(spec.m == 2);
  CHECK(spec.card == 10);
  CHECK(embed(spec, 0).sum() == doctest::Approx(2.0));

  // flip_vertex maps the rank of an m-subset to the rank of its complement.
  for (std::uint64_t r = 0; r < spec.card; ++r) {
    VertexId f = flip_vertex(spec, r);
    CHECK(flip_vertex(spec, f) == r);
    auto ext = subset_unrank(5, 3, r);
    std::vector<char> in(5, 0);
    for (int i : ext) in[static_cast<size_t>(i)] = 1;
    std::vector<int> comp;
    for (int i = 0; i < 5; ++i)
      if (!in[static_cast<size_t>(i)]) comp.push_back(i);
    CHECK(f == subset_rank(5, comp));
  }

  // Unflipped specs leave ids alone.
  StructureSpec plain = make_multilabel(5, 2);
  CHECK_FALSE(plain.flipped);
  CHECK(flip_vertex(plain, 3) == 3);
}

TEST_CASE("hungarian_min solves a frozen instance and matches brute force") {
  Matrix cost(3, 3);
  cost << 4, 1, 3,
          2, 0, 5,
          3, 2, 2;
  auto asg = hungarian_min(cost);
  REQUIRE(asg.size() == 3);
  CHECK(asg[0] == 1);
  CHECK(asg[1] == 0);
  CHECK(asg[2] == 2);

  Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix c(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) c(i, j) = rng.next_double(-2.0, 2.0);
    auto got = hungarian_min(c);
    double got_val = 0.0;
    for (int i = 0; i < 4; ++i) got_val += c(i, got[i]);
    double best = 1e300;
    for (std::uint64_t r = 0; r < 24; ++r) {
      auto p = perm_unrank(4, r);
      double v = 0.0;
      for (int i = 0; i < 4; ++i) v += c(i, p[i]);
      best = std::min(best, v);
    }
    CHECK(got_val == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("assignment_max_lex breaks ties toward the smallest permutation") {
  Matrix zero = Matrix::Zero(4, 4);
  auto asg = assignment_max_lex(zero);
  for (int i = 0; i < 4; ++i) CHECK(asg[i] == i);

  // Two optimal assignments; the lexicographically smaller row word wins.
  Matrix w(2, 2);
  w << 1, 1,
       1, 1;
  auto tie = assignment_max_lex(w);
  CHECK(tie[0] == 0);
  CHECK(tie[1] == 1);
}
