// Structure constructors and combinatorial subroutines.

#include "osp/structures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace osp {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    unsigned __int128 t = static_cast<unsigned __int128>(r) * (n - k + i) / i;
    if (t > std::numeric_limits<std::uint64_t>::max())
      throw ConfigError("binomial coefficient overflows 64 bits");
    r = static_cast<std::uint64_t>(t);
  }
  return r;
}

std::uint64_t subset_rank(int d, const std::vector<int>& s) {
  std::uint64_t rank = 0;
  int m = static_cast<int>(s.size());
  int prev = -1;
  for (int i = 0; i < m; ++i) {
    for (int j = prev + 1; j < s[i]; ++j) rank += binomial(d - 1 - j, m - 1 - i);
    prev = s[i];
  }
  return rank;
}

std::vector<int> subset_unrank(int d, int m, std::uint64_t rank) {
  std::vector<int> s(m);
  int j = 0;
  for (int i = 0; i < m; ++i) {
    for (;; ++j) {
      std::uint64_t block = binomial(d - 1 - j, m - 1 - i);
      if (rank < block) break;
      rank -= block;
    }
    s[i] = j++;
  }
  return s;
}

std::uint64_t perm_rank(const std::vector<int>& perm) {
  int m = static_cast<int>(perm.size());
  std::uint64_t rank = 0;
  std::uint64_t fact = 1;
  for (int i = 2; i <= m; ++i) fact *= i;  // m!
  for (int i = 0; i < m; ++i) {
    fact /= (m - i);
    int smaller = 0;
    for (int j = i + 1; j < m; ++j)
      if (perm[j] < perm[i]) ++smaller;
    rank += smaller * fact;
  }
  return rank;
}

std::vector<int> perm_unrank(int m, std::uint64_t rank) {
  std::vector<int> avail(m);
  std::iota(avail.begin(), avail.end(), 0);
  std::vector<int> perm(m);
  std::uint64_t fact = 1;
  for (int i = 2; i < m; ++i) fact *= i;  // (m-1)!
  for (int i = 0; i < m; ++i) {
    std::uint64_t idx = fact ? rank / fact : 0;
    rank -= idx * fact;
    perm[i] = avail[idx];
    avail.erase(avail.begin() + static_cast<long>(idx));
    if (m - 1 - i > 0) fact /= (m - 1 - i);
  }
  return perm;
}

StructureSpec make_multiclass(int d) {
  if (d < 2) throw ConfigError("Multiclass requires d >= 2");
  StructureSpec s;
  s.kind = StructureKind::Multiclass;
  s.d = d;
  s.m = 0;
  s.card = static_cast<std::uint64_t>(d);
  s.norm = GroundNorm::L1;
  s.nu = 2.0;
  s.gamma = 0.5;
  s.kappa = 1.0;
  s.diy = std::sqrt(2.0);
  s.V = Matrix::Ones(d, d) - Matrix::Identity(d, d);
  s.b = Vector::Zero(d);
  s.c = 0.0;
  s.name = "multiclass(d=" + std::to_string(d) + ")";
  return s;
}

StructureSpec make_multilabel(int d, int m) {
  if (d < 2 || m < 1 || m >= d) throw ConfigError("MultilabelFixed requires 2 <= d, 1 <= m < d");
  StructureSpec s;
  s.kind = StructureKind::MultilabelFixed;
  s.d = d;
  s.flipped = (2 * m > d);
  s.m = s.flipped ? d - m : m;
  s.card = binomial(d, s.m);
  s.norm = GroundNorm::L2;
  s.nu = std::sqrt(2.0);
  s.gamma = 1.0 / std::sqrt(static_cast<double>(d));
  s.kappa = 1.0;
  int mm = s.m;
  s.diy = std::max(std::sqrt(static_cast<double>(mm)),
                   std::sqrt(2.0 * std::min(mm, d - mm)));
  s.V = -(2.0 / d) * Matrix::Identity(d, d);
  s.b = Vector::Constant(d, 1.0 / d);
  s.c = static_cast<double>(mm) / d;
  s.name = "multilabel(d=" + std::to_string(d) + ",m=" + std::to_string(m) + ")";
  return s;
}

StructureSpec make_ranking(int m) {
  if (m < 1 || m > 12) throw ConfigError("Ranking requires 1 <= m <= 12");
  StructureSpec s;
  s.kind = StructureKind::Ranking;
  s.d = m * m;
  s.m = m;
  std::uint64_t fact = 1;
  for (int i = 2; i <= m; ++i) fact *= i;
  s.card = fact;
  s.norm = GroundNorm::L1;
  s.nu = 4.0;
  s.gamma = 1.0 / (2.0 * m);
  s.kappa = 1.0;
  s.diy = m >= 2 ? std::sqrt(2.0 * m) : 1.0;
  s.V = -(1.0 / m) * Matrix::Identity(s.d, s.d);
  s.b = Vector::Zero(s.d);
  s.c = 1.0;
  s.name = "ranking(m=" + std::to_string(m) + ")";
  return s;
}

VertexId flip_vertex(const StructureSpec& spec, VertexId v) {
  if (spec.kind != StructureKind::MultilabelFixed || !spec.flipped) return v;
  // Complementation reverses the lexicographic order of fixed-size subsets,
  // and C(d, m) = C(d, d-m), so the complement's rank is the mirror index.
  return spec.card - 1 - v;
}

Vector embed(const StructureSpec& spec, VertexId v) {
  Vector y = Vector::Zero(spec.d);
  switch (spec.kind) {
    case StructureKind::Multiclass:
      y(static_cast<Eigen::Index>(v)) = 1.0;
      break;
    case StructureKind::MultilabelFixed:
      for (int i : subset_unrank(spec.d, spec.m, v)) y(i) = 1.0;
      break;
    case StructureKind::Ranking: {
      std::vector<int> perm = perm_unrank(spec.m, v);
      for (int i = 0; i < spec.m; ++i) y(i * spec.m + perm[i]) = 1.0;
      break;
    }
  }
  return y;
}

VertexId vertex_from_embedding(const StructureSpec& spec, const Vector& y) {
  switch (spec.kind) {
    case StructureKind::Multiclass: {
      for (int i = 0; i < spec.d; ++i)
        if (y(i) > 0.5) return static_cast<VertexId>(i);
      throw NumericError("not a vertex embedding");
    }
    case StructureKind::MultilabelFixed: {
      std::vector<int> s;
      for (int i = 0; i < spec.d; ++i)
        if (y(i) > 0.5) s.push_back(i);
      if (static_cast<int>(s.size()) != spec.m) throw NumericError("not a vertex embedding");
      return subset_rank(spec.d, s);
    }
    case StructureKind::Ranking: {
      std::vector<int> perm(spec.m, -1);
      for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < spec.m; ++j)
          if (y(i * spec.m + j) > 0.5) perm[i] = j;
      for (int j : perm)
        if (j < 0) throw NumericError("not a vertex embedding");
      return perm_rank(perm);
    }
  }
  throw NumericError("unreachable");
}

double target_loss(const StructureSpec& spec, const Vector& y_point, VertexId y) {
  return y_point.dot(spec.V * embed(spec, y) + spec.b) + spec.c;
}

double target_loss_combinatorial(const StructureSpec& spec, VertexId yhat, VertexId y) {
  switch (spec.kind) {
    case StructureKind::Multiclass:
      return yhat == y ? 0.0 : 1.0;
    case StructureKind::MultilabelFixed: {
      std::vector<int> a = subset_unrank(spec.d, spec.m, yhat);
      std::vector<int> b = subset_unrank(spec.d, spec.m, y);
      std::vector<char> in_b(spec.d, 0);
      for (int i : b) in_b[i] = 1;
      int common = 0;
      for (int i : a) common += in_b[i];
      return 2.0 * (spec.m - common) / spec.d;
    }
    case StructureKind::Ranking: {
      std::vector<int> a = perm_unrank(spec.m, yhat);
      std::vector<int> b = perm_unrank(spec.m, y);
      int agree = 0;
      for (int i = 0; i < spec.m; ++i) agree += (a[i] == b[i]);
      return 1.0 - static_cast<double>(agree) / spec.m;
    }
  }
  throw NumericError("unreachable");
}

Matrix v_inverse(const StructureSpec& spec) {
  int d = spec.d;
  switch (spec.kind) {
    case StructureKind::Multiclass:
      return Matrix::Ones(d, d) / (d - 1.0) - Matrix::Identity(d, d);
    case StructureKind::MultilabelFixed:
      return -(d / 2.0) * Matrix::Identity(d, d);
    case StructureKind::Ranking:
      return -static_cast<double>(spec.m) * Matrix::Identity(d, d);
  }
  throw NumericError("unreachable");
}

Matrix second_moment_uniform(const StructureSpec& spec) {
  int d = spec.d;
  switch (spec.kind) {
    case StructureKind::Multiclass:
      return Matrix::Identity(d, d) / d;
    case StructureKind::MultilabelFixed: {
      double diag = static_cast<double>(spec.m) / d;
      double off = spec.m * (spec.m - 1.0) / (d * (d - 1.0));
      Matrix q = Matrix::Constant(d, d, off);
      q.diagonal().setConstant(diag);
      return q;
    }
    case StructureKind::Ranking: {
      int m = spec.m;
      Matrix q = Matrix::Zero(d, d);
      double same = 1.0 / m;
      double other = m >= 2 ? 1.0 / (m * (m - 1.0)) : 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          for (int k = 0; k < m; ++k)
            for (int l = 0; l < m; ++l) {
              double v;
              if (i == k && j == l) v = same;
              else if (i == k || j == l) v = 0.0;
              else v = other;
              q(i * m + j, k * m + l) = v;
            }
      return q;
    }
  }
  throw NumericError("unreachable");
}

Vector uniform_mean(const StructureSpec& spec) {
  switch (spec.kind) {
    case StructureKind::Multiclass:
      return Vector::Constant(spec.d, 1.0 / spec.d);
    case StructureKind::MultilabelFixed:
      return Vector::Constant(spec.d, static_cast<double>(spec.m) / spec.d);
    case StructureKind::Ranking:
      return Vector::Constant(spec.d, 1.0 / spec.m);
  }
  throw NumericError("unreachable");
}

namespace {

// Indices of the m largest entries, ties toward smaller index; ascending.
std::vector<int> top_m_indices(const Vector& v, int m) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v(a) > v(b); });
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

VertexId lmo(const StructureSpec& spec, const Vector& dir) {
  switch (spec.kind) {
    case StructureKind::Multiclass: {
      int best = 0;
      for (int i = 1; i < spec.d; ++i)
        if (dir(i) > dir(best)) best = i;
      return static_cast<VertexId>(best);
    }
    case StructureKind::MultilabelFixed:
      return subset_rank(spec.d, top_m_indices(dir, spec.m));
    case StructureKind::Ranking: {
      int m = spec.m;
      Matrix w(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) w(i, j) = dir(i * m + j);
      return perm_rank(assignment_max_lex(w));
    }
  }
  throw NumericError("unreachable");
}

double norm_of(const StructureSpec& spec, const Vector& v) {
  return spec.norm == GroundNorm::L1 ? v.lpNorm<1>() : v.norm();
}

std::pair<VertexId, double> nearest_vertex(const StructureSpec& spec, const Vector& p) {
  // For all three structures, ||y - p|| is minimized over vertices by
  // maximizing <p, y>, so the nearest vertex is lmo(p).
  VertexId v = lmo(spec, p);
  Vector y = embed(spec, v);
  return {v, norm_of(spec, y - p)};
}

VertexId sample_uniform(const StructureSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case StructureKind::Multiclass:
      return rng.next_below(spec.card);
    case StructureKind::MultilabelFixed: {
      std::vector<std::uint64_t> pick = rng.sample_indices(spec.d, spec.m);
      std::vector<int> s(pick.begin(), pick.end());
      std::sort(s.begin(), s.end());
      return subset_rank(spec.d, s);
    }
    case StructureKind::Ranking: {
      std::vector<std::uint64_t> pick = rng.sample_indices(spec.m, spec.m);
      std::vector<int> perm(pick.begin(), pick.end());
      return perm_rank(perm);
    }
  }
  throw NumericError("unreachable");
}

std::vector<int> hungarian_min(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

namespace {

double assignment_value(const Matrix& w, const std::vector<int>& asg) {
  double v = 0.0;
  for (size_t i = 0; i < asg.size(); ++i) v += w(static_cast<int>(i), asg[i]);
  return v;
}

// Max assignment value on rows [r, m) restricted to the columns not in `used`.
double best_remaining(const Matrix& w, int r, const std::vector<char>& used) {
  int m = static_cast<int>(w.rows());
  int k = m - r;
  if (k == 0) return 0.0;
  std::vector<int> cols;
  for (int j = 0; j < m; ++j)
    if (!used[j]) cols.push_back(j);
  Matrix sub(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) sub(i, j) = -w(r + i, cols[j]);
  std::vector<int> asg = hungarian_min(sub);
  double v = 0.0;
  for (int i = 0; i < k; ++i) v += w(r + i, cols[asg[i]]);
  return v;
}

}  // namespace

std::vector<int> assignment_max_lex(const Matrix& weight) {
  const int m = static_cast<int>(weight.rows());
  std::vector<int> opt = hungarian_min(-weight);
  double best = assignment_value(weight, opt);
  double tol = 1e-9 * (1.0 + std::abs(best));
  std::vector<int> out(m, -1);
  std::vector<char> used(m, 0);
  double fixed = 0.0;
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < m; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      double attain = fixed + weight(i, c) + best_remaining(weight, i + 1, used);
      if (attain >= best - tol) {
        out[i] = c;
        fixed += weight(i, c);
        break;
      }
      used[c] = 0;
    }
    if (out[i] < 0) throw NumericError("assignment canonicalization failed");
  }
  return out;
}

}  // namespace osp
