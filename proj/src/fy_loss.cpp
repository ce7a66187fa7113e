// Regularized predictions, certificates, and Fenchel-Young loss evaluation.

#include "osp/fy_loss.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

namespace osp {

Regularizer default_regularizer(const StructureSpec& spec, double zeta) {
  Regularizer r;
  switch (spec.kind) {
    case StructureKind::Multiclass:
      r.kind = RegularizerKind::NegEntropySimplex;
      r.lambda = 1.0;
      break;
    case StructureKind::MultilabelFixed:
      r.kind = RegularizerKind::SquaredL2CappedSimplex;
      r.lambda = 1.0;
      break;
    case StructureKind::Ranking:
      if (zeta <= 0) throw ConfigError("zeta must be positive");
      r.kind = RegularizerKind::NegEntropyBirkhoff;
      r.zeta = zeta;
      r.lambda = 1.0 / (spec.m * zeta);
      break;
  }
  return r;
}

double SparseDistribution::mass() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

void SparseDistribution::consolidate(double target_mass) {
  std::map<VertexId, double> merged;
  for (size_t i = 0; i < ids.size(); ++i) merged[ids[i]] += weights[i];
  ids.clear();
  weights.clear();
  double total = 0.0;
  for (const auto& [id, w] : merged) {
    if (w < 1e-12) continue;
    ids.push_back(id);
    weights.push_back(w);
    total += w;
  }
  if (total <= 0.0) {
    if (target_mass > 0.0) throw NumericError("empty distribution after consolidation");
    return;
  }
  double scale = target_mass / total;
  for (double& w : weights) w *= scale;
}

Vector SparseDistribution::mean(const StructureSpec& spec) const {
  Vector m = Vector::Zero(spec.d);
  for (size_t i = 0; i < ids.size(); ++i) m += weights[i] * embed(spec, ids[i]);
  return m;
}

double psi(const Regularizer& reg, const Vector& mu) {
  switch (reg.kind) {
    case RegularizerKind::NegEntropySimplex:
      return mu.unaryExpr([](double x) { return xlogx(x); }).sum();
    case RegularizerKind::SquaredL2CappedSimplex:
      return 0.5 * mu.squaredNorm();
    case RegularizerKind::NegEntropyBirkhoff:
      return mu.unaryExpr([](double x) { return xlogx(x); }).sum() / reg.zeta;
  }
  throw NumericError("unreachable");
}

Vector capped_simplex_project(const Vector& theta, int m) {
  const int d = static_cast<int>(theta.size());
  if (m < 0 || m > d) throw ConfigError("capped simplex cap out of range");
  auto value = [&](double tau) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::clamp(theta(i) - tau, 0.0, 1.0);
    return s;
  };
  std::vector<double> bps(2 * d);
  for (int i = 0; i < d; ++i) {
    bps[2 * i] = theta(i);
    bps[2 * i + 1] = theta(i) - 1.0;
  }
  std::sort(bps.begin(), bps.end());
  double target = static_cast<double>(m);
  double tau = bps.back();
  // value() is continuous and nonincreasing with value(bps.front()) = d and
  // value(bps.back()) = 0; find the segment crossing the target.
  double lo = bps.front();
  if (value(lo) <= target) {
    tau = lo;
  } else {
    double hi = bps.back();
    for (const double bp : bps) {
      if (value(bp) <= target) {
        hi = bp;
        break;
      }
      lo = bp;
    }
    double fhi = value(hi);
    if (fhi == target) {
      tau = hi;
    } else {
      double mid = 0.5 * (lo + hi);
      double ones = 0.0, active_sum = 0.0;
      int active = 0;
      for (int i = 0; i < d; ++i) {
        if (theta(i) - 1.0 >= mid) {
          ones += 1.0;
        } else if (theta(i) > mid) {
          active_sum += theta(i);
          ++active;
        }
      }
      if (active == 0) throw NumericError("capped simplex projection failed");
      tau = (ones + active_sum - target) / active;
    }
  }
  Vector y(d);
  for (int i = 0; i < d; ++i) y(i) = std::clamp(theta(i) - tau, 0.0, 1.0);
  return y;
}

SparseDistribution caratheodory_capped(const StructureSpec& spec, const Vector& y) {
  const int d = spec.d, m = spec.m;
  Vector r = y;
  double rho = 1.0;
  SparseDistribution out;
  const int cap = 2 * (d + m) + 4;
  for (int iter = 0; iter < cap && rho > 1e-13; ++iter) {
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return r(a) > r(b); });
    std::vector<int> s(idx.begin(), idx.begin() + m);
    std::sort(s.begin(), s.end());
    double min_in = std::numeric_limits<double>::infinity();
    for (int i : s) min_in = std::min(min_in, r(i));
    double max_out = -std::numeric_limits<double>::infinity();
    for (int j = m; j < d; ++j) max_out = std::max(max_out, r(idx[j]));
    double w = min_in;
    if (m < d) w = std::min(w, rho - max_out);
    w = std::min(w, rho);
    if (w <= 1e-15) break;
    out.ids.push_back(subset_rank(d, s));
    out.weights.push_back(w);
    for (int i : s) r(i) -= w;
    rho -= w;
  }
  if (rho >= 1e-9) throw NumericError("Caratheodory residual too large");
  out.consolidate(1.0);
  return out;
}

namespace {

// Snap a nearly doubly stochastic matrix onto exact unit marginals by
// alternating the closed-form Frobenius projection onto the affine set
// {row sums = col sums = 1} with a nonnegativity clamp. Clamping can hand a
// (1 - 1/m) fraction of the error back when the mass sits next to zeros, so
// iterate until the marginals are at rounding level; this keeps the downstream
// Birkhoff-von-Neumann residual independent of the Sinkhorn tolerance.
Vector snap_doubly_stochastic(Matrix& a) {
  const int m = static_cast<int>(a.rows());
  for (int pass = 0; pass < 400; ++pass) {
    Vector r = a.rowwise().sum().array() - 1.0;
    Vector c = a.colwise().sum().transpose().array() - 1.0;
    if (std::max(r.cwiseAbs().maxCoeff(), c.cwiseAbs().maxCoeff()) < 1e-13) break;
    double s = r.sum();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) -= r(i) / m + c(j) / m - s / (m * m);
    a = a.cwiseMax(0.0);
  }
  Vector y(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) y(i * m + j) = a(i, j);
  return y;
}

}  // namespace

Vector sinkhorn(const Vector& theta, int m, double zeta, double tol, int max_iters) {
  Matrix scaled(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) scaled(i, j) = zeta * theta(i * m + j);
  const bool log_domain = scaled.cwiseAbs().maxCoeff() > 30.0;

  // Alternating normalization first: cheap, and on mild inputs it converges
  // long before the warmup budget runs out.
  int used = 0;
  const int warmup = std::min(max_iters, 300);
  Matrix a(m, m);
  if (log_domain) {
    a = scaled;
    for (; used < warmup; ++used) {
      for (int i = 0; i < m; ++i) a.row(i).array() -= logsumexp(a.row(i));
      for (int j = 0; j < m; ++j) a.col(j).array() -= logsumexp(a.col(j));
      double dev = 0.0;
      for (int i = 0; i < m; ++i) dev = std::max(dev, std::abs(std::expm1(logsumexp(a.row(i)))));
      for (int j = 0; j < m; ++j) dev = std::max(dev, std::abs(std::expm1(logsumexp(a.col(j)))));
      if (dev <= tol) {
        Matrix p = a.array().exp();
        return snap_doubly_stochastic(p);
      }
    }
  } else {
    Matrix p = scaled.array().exp().min(1e300).max(1e-300);
    for (; used < warmup; ++used) {
      for (int i = 0; i < m; ++i) p.row(i) /= p.row(i).sum();
      for (int j = 0; j < m; ++j) p.col(j) /= p.col(j).sum();
      double dev = 0.0;
      for (int i = 0; i < m; ++i) dev = std::max(dev, std::abs(p.row(i).sum() - 1.0));
      for (int j = 0; j < m; ++j) dev = std::max(dev, std::abs(p.col(j).sum() - 1.0));
      if (dev <= tol) return snap_doubly_stochastic(p);
    }
    a = p.array().max(1e-300).log();
  }

  // Peaked inputs (near-degenerate transport) leave alternating normalization
  // with a sublinear tail that no iteration budget closes. The dual in the
  // potentials is smooth and 2m-dimensional, so finish with damped Newton:
  // minimize sum exp(a + u (+) v) - sum u - sum v, gauge fixed by v_m = 0.
  const int n = 2 * m - 1;
  for (; used < max_iters; ++used) {
    Matrix p = a.array().exp();
    Vector r = p.rowwise().sum();
    Vector c = p.colwise().sum();
    double dev = std::max((r.array() - 1.0).abs().maxCoeff(),
                          (c.array() - 1.0).abs().maxCoeff());
    if (dev <= tol) return snap_doubly_stochastic(p);

    Matrix h = Matrix::Zero(n, n);
    h.topLeftCorner(m, m).diagonal() = r;
    h.topRightCorner(m, m - 1) = p.leftCols(m - 1);
    h.bottomLeftCorner(m - 1, m) = p.leftCols(m - 1).transpose();
    h.bottomRightCorner(m - 1, m - 1).diagonal() = c.head(m - 1);
    Vector g(n);
    g.head(m) = r.array() - 1.0;
    g.tail(m - 1) = c.head(m - 1).array() - 1.0;
    double mu = 1e-14 * h.diagonal().maxCoeff();
    Vector step = (h + mu * Matrix::Identity(n, n)).ldlt().solve(-g);

    double f0 = p.sum();
    double gd = g.dot(step);
    bool moved = false;
    for (double s = 1.0; s >= 0x1p-60; s *= 0.5) {
      Matrix trial = a;
      for (int i = 0; i < m; ++i) trial.row(i).array() += s * step(i);
      for (int j = 0; j < m - 1; ++j) trial.col(j).array() += s * step(m + j);
      double f1 = trial.array().exp().sum() - s * step.sum();
      if (f1 <= f0 + 1e-4 * s * gd) {
        a = trial;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // Keep making progress if the Newton step is unusable here.
      for (int i = 0; i < m; ++i) a.row(i).array() -= logsumexp(a.row(i));
      for (int j = 0; j < m; ++j) a.col(j).array() -= logsumexp(a.col(j));
    }
  }
  throw NumericError("Sinkhorn did not converge");
}

namespace {

// Perfect matching on {(i,j) : a(i,j) > eps} forcing row fi -> column fj.
// Returns row -> column, or empty if none exists.
std::vector<int> support_matching(const Matrix& a, double eps, int fi, int fj) {
  const int m = static_cast<int>(a.rows());
  std::vector<int> col_match(m, -1);
  col_match[fj] = fi;
  std::vector<char> visited(m, 0);
  std::function<bool(int)> try_row = [&](int i) -> bool {
    for (int j = 0; j < m; ++j) {
      if (j == fj || visited[j] || a(i, j) <= eps) continue;
      visited[j] = 1;
      if (col_match[j] < 0 || try_row(col_match[j])) {
        col_match[j] = i;
        return true;
      }
    }
    return false;
  };
  for (int i = 0; i < m; ++i) {
    if (i == fi) continue;
    std::fill(visited.begin(), visited.end(), 0);
    if (!try_row(i)) return {};
  }
  std::vector<int> row_to_col(m, -1);
  for (int j = 0; j < m; ++j)
    if (col_match[j] >= 0) row_to_col[col_match[j]] = j;
  return row_to_col;
}

}  // namespace

SparseDistribution birkhoff_von_neumann(const StructureSpec& spec, const Vector& y) {
  const int m = spec.m;
  Matrix a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = std::max(y(i * m + j), 0.0);
  SparseDistribution out;
  const int cap = m * m + m + 2;
  for (int iter = 0; iter < cap; ++iter) {
    double rho = a.sum() / m;
    if (rho < 1e-9) break;
    int bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (a(i, j) > 1e-12 && a(i, j) < best) {
          best = a(i, j);
          bi = i;
          bj = j;
        }
    if (bi < 0) break;
    std::vector<int> match = support_matching(a, 1e-12, bi, bj);
    if (match.empty()) match = support_matching(a, 0.0, bi, bj);
    if (match.empty()) break;
    double w = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) w = std::min(w, a(i, match[i]));
    if (w <= 0.0) break;
    out.ids.push_back(perm_rank(match));
    out.weights.push_back(w);
    for (int i = 0; i < m; ++i) a(i, match[i]) = std::max(a(i, match[i]) - w, 0.0);
  }
  if (1.0 - out.mass() >= 1e-8) throw NumericError("Birkhoff-von-Neumann residual too large");
  out.consolidate(1.0);
  return out;
}

Prediction regularized_prediction(const StructureSpec& spec, const Regularizer& reg,
                                  const Vector& theta) {
  Prediction p;
  switch (reg.kind) {
    case RegularizerKind::NegEntropySimplex: {
      p.yhat = (theta.array() - logsumexp(theta)).exp();
      p.cert.ids.resize(spec.d);
      p.cert.weights.resize(spec.d);
      for (int i = 0; i < spec.d; ++i) {
        p.cert.ids[i] = static_cast<VertexId>(i);
        p.cert.weights[i] = p.yhat(i);
      }
      p.cert.consolidate(1.0);
      break;
    }
    case RegularizerKind::SquaredL2CappedSimplex:
      p.yhat = capped_simplex_project(theta, spec.m);
      p.cert = caratheodory_capped(spec, p.yhat);
      break;
    case RegularizerKind::NegEntropyBirkhoff:
      p.yhat = sinkhorn(theta, spec.m, reg.zeta, reg.sinkhorn_tol, reg.sinkhorn_max_iters);
      p.cert = birkhoff_von_neumann(spec, p.yhat);
      break;
  }
  return p;
}

double fy_loss_at(const StructureSpec& spec, const Regularizer& reg, const Vector& theta,
                  VertexId y, const Vector& yhat) {
  Vector ey = embed(spec, y);
  double s = theta.dot(yhat) - psi(reg, yhat) + psi(reg, ey) - theta.dot(ey);
  if (s < 0.0) {
    if (s < -1e-9) throw NumericError("negative Fenchel-Young loss");
    s = 0.0;
  }
  return s;
}

double fy_loss(const StructureSpec& spec, const Regularizer& reg, const Vector& theta,
               VertexId y) {
  return fy_loss_at(spec, reg, theta, y, regularized_prediction(spec, reg, theta).yhat);
}

Vector surrogate_gradient(const StructureSpec& spec, const Regularizer& reg,
                          const Vector& theta, VertexId y) {
  return regularized_prediction(spec, reg, theta).yhat - embed(spec, y);
}

namespace {

Vector psi_gradient(const Regularizer& reg, const Vector& mu) {
  switch (reg.kind) {
    case RegularizerKind::NegEntropySimplex:
      return mu.unaryExpr([](double x) { return std::log(std::max(x, 1e-300)) + 1.0; });
    case RegularizerKind::SquaredL2CappedSimplex:
      return mu;
    case RegularizerKind::NegEntropyBirkhoff:
      return mu.unaryExpr([](double x) { return std::log(std::max(x, 1e-300)) + 1.0; }) /
             reg.zeta;
  }
  throw NumericError("unreachable");
}

}  // namespace

Prediction frank_wolfe_prediction(const StructureSpec& spec, const Regularizer& reg,
                                  const Vector& theta, double tol, int max_iters) {
  // Minimize g(mu) = Psi(mu) - <theta, mu> over conv(Y) with away steps.
  std::map<VertexId, double> active;
  VertexId v0 = lmo(spec, theta);
  active[v0] = 1.0;
  Vector mu = embed(spec, v0);
  auto g_dir_derivative = [&](const Vector& point, const Vector& dir) {
    return (psi_gradient(reg, point) - theta).dot(dir);
  };
  for (int it = 0; it < max_iters; ++it) {
    Vector grad = psi_gradient(reg, mu) - theta;
    VertexId s = lmo(spec, -grad);
    Vector es = embed(spec, s);
    double gap = grad.dot(mu - es);
    if (gap <= tol) break;
    VertexId away_id = active.begin()->first;
    double away_score = -std::numeric_limits<double>::infinity();
    for (const auto& [id, w] : active) {
      double sc = grad.dot(embed(spec, id));
      if (sc > away_score) {
        away_score = sc;
        away_id = id;
      }
    }
    Vector ea = embed(spec, away_id);
    Vector fw_dir = es - mu;
    Vector aw_dir = mu - ea;
    bool use_fw = (-grad.dot(fw_dir)) >= (-grad.dot(aw_dir));
    Vector dir = use_fw ? fw_dir : aw_dir;
    double wa = active[away_id];
    double gamma_max = use_fw ? 1.0 : (wa < 1.0 ? wa / (1.0 - wa) : 1e12);
    // Exact/bisection line search on the convex 1-d slice.
    double lo = 0.0, hi = gamma_max;
    if (g_dir_derivative(mu + hi * dir, dir) <= 0.0) {
      lo = hi;
    } else {
      for (int b = 0; b < 80; ++b) {
        double mid = 0.5 * (lo + hi);
        if (g_dir_derivative(mu + mid * dir, dir) > 0.0) hi = mid;
        else lo = mid;
      }
    }
    double gamma = lo;
    if (gamma <= 0.0) break;
    if (use_fw) {
      for (auto& [id, w] : active) w *= (1.0 - gamma);
      active[s] += gamma;
    } else {
      for (auto& [id, w] : active) w *= (1.0 + gamma);
      active[away_id] -= gamma;
    }
    for (auto iter2 = active.begin(); iter2 != active.end();) {
      if (iter2->second <= 1e-14) iter2 = active.erase(iter2);
      else ++iter2;
    }
    mu += gamma * dir;
  }
  Prediction p;
  p.yhat = mu;
  for (const auto& [id, w] : active) {
    p.cert.ids.push_back(id);
    p.cert.weights.push_back(w);
  }
  p.cert.consolidate(1.0);
  return p;
}

}  // namespace osp
