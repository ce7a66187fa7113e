#include "osp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "osp/decoding.hpp"
#include "osp/delay.hpp"
#include "osp/envs.hpp"
#include "osp/estimators.hpp"
#include "osp/harness.hpp"
#include "osp/learners.hpp"
#include "osp/numerics.hpp"
#include "osp/rng.hpp"

namespace osp {

namespace {

constexpr std::uint64_t kEnumLimit = 20000;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void add(std::vector<CheckResult>& out, const std::string& name, bool pass,
         double slack, const std::string& detail = "") {
  out.push_back({name, pass, slack, detail});
}

// Pass iff measured <= bound + tol; slack = bound - measured.
void add_bound(std::vector<CheckResult>& out, const std::string& name,
               double measured, double bound, double tol) {
  add(out, name, measured <= bound + tol, bound - measured,
      "measured " + fmt(measured) + " bound " + fmt(bound));
}

// Pass iff |err| <= tol; slack = tol - |err|.
void add_close(std::vector<CheckResult>& out, const std::string& name,
               double err, double tol) {
  add(out, name, std::abs(err) <= tol, tol - std::abs(err),
      "err " + fmt(err) + " tol " + fmt(tol));
}

Vector random_theta(const StructureSpec& spec, Rng& rng, double scale) {
  Vector theta(spec.d);
  for (int i = 0; i < spec.d; ++i) theta[i] = rng.next_double(-scale, scale);
  return theta;
}

double lemma_ratio(const StructureSpec& spec, const Regularizer& reg) {
  return 4.0 * spec.gamma / (reg.lambda * spec.nu);
}

}  // namespace

std::vector<CheckResult> check_structure(const StructureSpec& spec) {
  std::vector<CheckResult> out;
  const std::string p = spec.name + "/";
  if (spec.card > kEnumLimit) {
    add(out, p + "enumerable", false, -1.0, "card too large for oracles");
    return out;
  }
  const long K = static_cast<long>(spec.card);
  std::vector<Vector> ys(K);
  for (long v = 0; v < K; ++v) ys[v] = embed(spec, v);

  // Codec round trip and injectivity.
  {
    bool ok = true;
    for (long v = 0; v < K && ok; ++v)
      ok = vertex_from_embedding(spec, ys[v]) == static_cast<VertexId>(v);
    add(out, p + "codec-roundtrip", ok, ok ? 0.0 : -1.0);
  }

  // SELF decomposition against the combinatorial loss, all pairs.
  {
    double err = 0.0, lo = 1e300, hi = -1e300;
    bool diag_ok = true;
    for (long a = 0; a < K; ++a)
      for (long b = 0; b < K; ++b) {
        double self = target_loss(spec, ys[a], b);
        double comb = target_loss_combinatorial(spec, a, b);
        err = std::max(err, std::abs(self - comb));
        lo = std::min(lo, comb);
        hi = std::max(hi, comb);
        if ((a == b) != (comb == 0.0)) diag_ok = false;
      }
    add_close(out, p + "self-identity", err, 1e-12);
    add(out, p + "loss-range", diag_ok && lo >= 0.0 && hi <= 1.0 + 1e-12,
        1.0 - hi, "max loss " + fmt(hi));
  }

  // Minimum pairwise distance in the ground norm.
  {
    double mind = 1e300;
    for (long a = 0; a < K; ++a)
      for (long b = a + 1; b < K; ++b)
        mind = std::min(mind, norm_of(spec, ys[a] - ys[b]));
    add_close(out, p + "nu-min-distance", mind - spec.nu, 1e-12);
  }

  // Lipschitz factor of the loss over vertex triples.
  {
    double need = 0.0;
    for (long a = 0; a < K; ++a)
      for (long b = 0; b < K; ++b) {
        if (a == b) continue;
        double dist = norm_of(spec, ys[a] - ys[b]);
        for (long c = 0; c < K; ++c) {
          double diff = std::abs(target_loss_combinatorial(spec, a, c) -
                                 target_loss_combinatorial(spec, b, c));
          need = std::max(need, diff / dist);
        }
      }
    add_bound(out, p + "gamma-lipschitz", need, spec.gamma, 1e-12);
  }

  // l2-vs-ground-norm factor over vertex differences.
  {
    double need = 0.0;
    for (long a = 0; a < K; ++a)
      for (long b = a + 1; b < K; ++b)
        need = std::max(need, (ys[a] - ys[b]).norm() /
                                  norm_of(spec, ys[a] - ys[b]));
    add_bound(out, p + "kappa-norm-ratio", need, spec.kappa, 1e-12);
  }

  // Euclidean size bound.
  {
    double need = 0.0;
    for (long a = 0; a < K; ++a) {
      need = std::max(need, ys[a].norm());
      for (long b = a + 1; b < K; ++b)
        need = std::max(need, (ys[a] - ys[b]).norm());
    }
    add_bound(out, p + "diy-euclidean", need, spec.diy, 1e-12);
  }

  // Uniform moments by enumeration.
  {
    Matrix q = Matrix::Zero(spec.d, spec.d);
    Vector mu = Vector::Zero(spec.d);
    for (long v = 0; v < K; ++v) {
      q += ys[v] * ys[v].transpose();
      mu += ys[v];
    }
    q /= static_cast<double>(K);
    mu /= static_cast<double>(K);
    add_close(out, p + "uniform-second-moment",
              (q - second_moment_uniform(spec)).cwiseAbs().maxCoeff(), 1e-12);
    add_close(out, p + "uniform-mean",
              (mu - uniform_mean(spec)).cwiseAbs().maxCoeff(), 1e-12);
  }

  // V has the stated closed-form inverse.
  {
    Matrix prod = spec.V * v_inverse(spec);
    prod -= Matrix::Identity(spec.d, spec.d);
    add_close(out, p + "v-inverse", prod.cwiseAbs().maxCoeff(), 1e-9);
  }

  // Linear maximization oracle against enumeration (random + tie-heavy dirs).
  {
    Rng rng(derive_seed(911, static_cast<std::uint64_t>(spec.card)));
    bool ok = true;
    double verr = 0.0;
    for (int trial = 0; trial < 36 && ok; ++trial) {
      Vector dir(spec.d);
      if (trial == 0) dir.setZero();
      else if (trial == 1) dir.setOnes();
      else if (trial == 2) dir = -Vector::Ones(spec.d);
      else if (trial < 6) dir = ys[static_cast<long>(
          rng.next_below(static_cast<std::uint64_t>(K)))];
      else
        for (int i = 0; i < spec.d; ++i) dir[i] = rng.next_double(-2.0, 2.0);
      long best = 0;
      double bestval = dir.dot(ys[0]);
      for (long v = 1; v < K; ++v) {
        double val = dir.dot(ys[v]);
        if (val > bestval) { bestval = val; best = v; }
      }
      VertexId got = lmo(spec, dir);
      verr = std::max(verr, std::abs(dir.dot(ys[static_cast<long>(got)]) - bestval));
      if (verr > 1e-9) ok = false;
      if (trial < 6 && got != static_cast<VertexId>(best)) ok = false;  // ties
    }
    add(out, p + "lmo-argmax", ok, 1e-9 - verr, "value err " + fmt(verr));
  }

  // Nearest vertex against enumeration on points of the polytope.
  {
    Rng rng(derive_seed(912, static_cast<std::uint64_t>(spec.card)));
    bool ok = true;
    double derr = 0.0;
    for (int trial = 0; trial < 24 && ok; ++trial) {
      Vector pnt = Vector::Zero(spec.d);
      double mass = 0.0;
      for (int j = 0; j < 4; ++j) {
        double w = rng.next_double();
        pnt += w * ys[static_cast<long>(rng.next_below(static_cast<std::uint64_t>(K)))];
        mass += w;
      }
      pnt /= mass;
      double best = 1e300, second = 1e300;
      long arg = 0;
      for (long v = 0; v < K; ++v) {
        double dist = norm_of(spec, ys[v] - pnt);
        if (dist < best) { second = best; best = dist; arg = v; }
        else second = std::min(second, dist);
      }
      auto [got, dist] = nearest_vertex(spec, pnt);
      derr = std::max(derr, std::abs(dist - best));
      if (derr > 1e-9) ok = false;
      if (second - best > 1e-9 && got != static_cast<VertexId>(arg)) ok = false;
    }
    add(out, p + "nearest-vertex", ok, 1e-9 - derr, "dist err " + fmt(derr));
  }

  // Complement codec for flipped multilabel specs.
  if (spec.kind == StructureKind::MultilabelFixed) {
    bool ok = true;
    int m_ext = spec.flipped ? spec.d - spec.m : spec.m;
    for (long v = 0; v < K && ok; ++v) {
      if (flip_vertex(spec, flip_vertex(spec, v)) != static_cast<VertexId>(v))
        ok = false;
      std::vector<int> ext = subset_unrank(spec.d, m_ext, v);
      std::vector<char> mark(spec.d, 0);
      for (int i : ext) mark[i] = 1;
      Vector y = embed(spec, flip_vertex(spec, v));
      for (int i = 0; i < spec.d; ++i) {
        double want = spec.flipped ? (mark[i] ? 0.0 : 1.0) : (mark[i] ? 1.0 : 0.0);
        if (std::abs(y[i] - want) > 0.0) ok = false;
      }
    }
    add(out, p + "flip-codec", ok, ok ? 0.0 : -1.0);
  }

  // Assignment oracles against enumeration (ranking only, m <= 4).
  if (spec.kind == StructureKind::Ranking && spec.m <= 4) {
    Rng rng(derive_seed(913, static_cast<std::uint64_t>(spec.m)));
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      Matrix w(spec.m, spec.m);
      for (int i = 0; i < spec.m; ++i)
        for (int j = 0; j < spec.m; ++j)
          w(i, j) = trial == 0 ? 0.0 : rng.next_double(-1.0, 1.0);
      // Enumerate permutations via the codec.
      long bestv = -1;
      double bestval = -1e300;
      double minval = 1e300;
      long minarg = -1;
      for (long v = 0; v < K; ++v) {
        std::vector<int> perm = perm_unrank(spec.m, static_cast<std::uint64_t>(v));
        double val = 0.0;
        for (int i = 0; i < spec.m; ++i) val += w(i, perm[i]);
        if (val > bestval + 1e-12) { bestval = val; bestv = v; }
        if (val < minval) { minval = val; minarg = v; }
      }
      std::vector<int> got = assignment_max_lex(w);
      double gotval = 0.0;
      for (int i = 0; i < spec.m; ++i) gotval += w(i, got[i]);
      if (std::abs(gotval - bestval) > 1e-9) ok = false;
      if (trial == 0 && perm_rank(got) != 0) ok = false;  // all-ties case
      std::vector<int> gmin = hungarian_min(w);
      double gminval = 0.0;
      for (int i = 0; i < spec.m; ++i) gminval += w(i, gmin[i]);
      if (std::abs(gminval - minval) > 1e-9) ok = false;
      (void)minarg;
    }
    add(out, p + "assignment-oracles", ok, ok ? 0.0 : -1.0);
  }

  return out;
}

std::vector<CheckResult> check_losses(const StructureSpec& spec,
                                      const Regularizer& reg, int trials,
                                      std::uint64_t seed) {
  std::vector<CheckResult> out;
  const std::string p = spec.name + "/";
  Rng rng(seed);
  const long K = static_cast<long>(spec.card);

  double fd_err = 0.0;
  double sc_viol = -1e300;   // max of lambda/2 * dist^2 - S
  double eq1_viol = -1e300;  // max of ||grad||^2 - b_unit * S
  double poly_err = 0.0;
  double cert_err = 0.0, cert_mass_err = 0.0;
  double fw_err = 0.0;
  bool nonneg_ok = true;
  const double b_unit = 2.0 * spec.kappa * spec.kappa / reg.lambda;

  for (int trial = 0; trial < trials; ++trial) {
    Vector theta = random_theta(spec, rng, 3.0);
    Prediction pred = regularized_prediction(spec, reg, theta);
    const Vector& yhat = pred.yhat;

    // Membership: coordinates in [0, 1] plus the right affine constraints.
    poly_err = std::max(poly_err, (-yhat.minCoeff()));
    poly_err = std::max(poly_err, yhat.maxCoeff() - 1.0);
    if (spec.kind == StructureKind::Multiclass)
      poly_err = std::max(poly_err, std::abs(yhat.sum() - 1.0));
    else if (spec.kind == StructureKind::MultilabelFixed)
      poly_err = std::max(poly_err, std::abs(yhat.sum() - spec.m));
    else {
      for (int i = 0; i < spec.m; ++i) {
        poly_err = std::max(
            poly_err, std::abs(yhat.segment(i * spec.m, spec.m).sum() - 1.0));
        double col = 0.0;
        for (int j = 0; j < spec.m; ++j) col += yhat[j * spec.m + i];
        poly_err = std::max(poly_err, std::abs(col - 1.0));
      }
    }

    // Certificate: unit mass, mean equal to the prediction.
    cert_mass_err = std::max(cert_mass_err, std::abs(pred.cert.mass() - 1.0));
    cert_err = std::max(
        cert_err, (pred.cert.mean(spec) - yhat).cwiseAbs().maxCoeff());

    // Gradient of the conjugate by central differences.
    if (trial < 8) {
      const double h = 1e-5;
      for (int i = 0; i < spec.d; ++i) {
        Vector tp = theta, tm = theta;
        tp[i] += h;
        tm[i] -= h;
        Prediction pp = regularized_prediction(spec, reg, tp);
        Prediction pm = regularized_prediction(spec, reg, tm);
        double fp = tp.dot(pp.yhat) - psi(reg, pp.yhat);
        double fm = tm.dot(pm.yhat) - psi(reg, pm.yhat);
        fd_err = std::max(fd_err, std::abs((fp - fm) / (2 * h) - yhat[i]));
      }
    }

    // Frank-Wolfe solves the same problem.
    if (trial < 5) {
      Prediction fw = frank_wolfe_prediction(spec, reg, theta, 1e-7, 5000);
      fw_err = std::max(fw_err, (fw.yhat - yhat).cwiseAbs().maxCoeff());
    }

    // Loss properties at every label (or a sample when K is large).
    for (long y = 0; y < K; y += std::max<long>(1, K / 16)) {
      double s;
      try {
        s = fy_loss_at(spec, reg, theta, y, yhat);
      } catch (const NumericError&) {
        nonneg_ok = false;
        break;
      }
      Vector diff = yhat - embed(spec, y);
      double dist = norm_of(spec, diff);
      sc_viol = std::max(sc_viol, 0.5 * reg.lambda * dist * dist - s);
      eq1_viol = std::max(eq1_viol, diff.squaredNorm() - b_unit * s);
    }
  }

  add_close(out, p + "fd-conjugate-gradient", fd_err, 1e-4);
  add(out, p + "loss-nonnegative", nonneg_ok, nonneg_ok ? 0.0 : -1.0);
  add_bound(out, p + "strong-convexity", sc_viol, 0.0, 1e-9);
  add_bound(out, p + "gradient-norm-bound", eq1_viol, 0.0, 1e-9);
  add_close(out, p + "polytope-membership", poly_err, 1e-7);
  add_close(out, p + "cert-mass", cert_mass_err, 1e-9);
  add_close(out, p + "cert-mean", cert_err, 1e-7);
  add_close(out, p + "frank-wolfe-parity", fw_err, 1e-4);

  // Aligned scores drive the loss to zero.
  {
    Rng r2(derive_seed(seed, 17));
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      VertexId y = sample_uniform(spec, r2);
      Vector theta = 40.0 * (2.0 * embed(spec, y) - Vector::Ones(spec.d));
      worst = std::max(worst, fy_loss(spec, reg, theta, y));
    }
    add_close(out, p + "aligned-loss-vanishes", worst, 1e-5);
  }

  // Structure-specific closed forms.
  if (spec.kind == StructureKind::Multiclass) {
    Rng r2(derive_seed(seed, 23));
    double err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      Vector theta = random_theta(spec, r2, 4.0);
      VertexId y = sample_uniform(spec, r2);
      err = std::max(err, std::abs(fy_loss(spec, reg, theta, y) -
                                   (logsumexp(theta) - theta[static_cast<long>(y)])));
    }
    err = std::max(err, std::abs(fy_loss(spec, reg, Vector::Zero(spec.d), 0) -
                                 std::log(static_cast<double>(spec.d))));
    add_close(out, p + "softmax-closed-form", err, 1e-9);
  }
  if (spec.kind == StructureKind::MultilabelFixed) {
    Rng r2(derive_seed(seed, 23));
    double err = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      Vector theta = random_theta(spec, r2, 4.0);
      VertexId y = sample_uniform(spec, r2);
      Vector proj = capped_simplex_project(theta, spec.m);
      double conj = theta.dot(proj) - 0.5 * proj.squaredNorm();
      double direct = conj + 0.5 * static_cast<double>(spec.m) -
                      theta.dot(embed(spec, y));
      err = std::max(err, std::abs(fy_loss(spec, reg, theta, y) - direct));
    }
    add_close(out, p + "half-square-closed-form", err, 1e-9);
  }
  if (spec.kind == StructureKind::Ranking) {
    double err = 0.0;
    // Psi at a vertex: zero entropy.
    err = std::max(err, std::abs(psi(reg, embed(spec, 0))));
    add_close(out, p + "vertex-entropy-zero", err, 1e-12);
  }

  return out;
}

std::vector<CheckResult> check_decoding(const StructureSpec& spec,
                                        const Regularizer& reg, int trials,
                                        std::uint64_t seed) {
  std::vector<CheckResult> out;
  const std::string p = spec.name + "/";
  Rng rng(seed);
  const long K = static_cast<long>(spec.card);
  const double ratio = lemma_ratio(spec, reg);
  const double qgrid[] = {0.0, 0.1, 0.5, 1.0};

  double mass_err = 0.0, mean_err = 0.0, mom_err = 0.0, eloss_err = 0.0;
  double lemma_viol = -1e300, floor_viol = -1e300, pchosen_err = 0.0;

  for (int trial = 0; trial < trials; ++trial) {
    Vector theta = random_theta(spec, rng, 3.0);
    VertexId y = sample_uniform(spec, rng);
    for (double q : qgrid) {
      DecodeOutcome o = q == 0.0 ? randomized_decode(spec, reg, theta, rng)
                                 : rdue_decode(spec, reg, theta, q, rng);
      double mass = 0.0, eloss = 0.0;
      Vector mean = Vector::Zero(spec.d);
      Matrix mom = Matrix::Zero(spec.d, spec.d);
      double minp = 1e300;
      for (long v = 0; v < K; ++v) {
        double pr = pmf(spec, o, v);
        minp = std::min(minp, pr);
        mass += pr;
        Vector yv = embed(spec, v);
        mean += pr * yv;
        mom += pr * yv * yv.transpose();
        eloss += pr * target_loss_combinatorial(spec, v, y);
      }
      mass_err = std::max(mass_err, std::abs(mass - 1.0));
      mean_err = std::max(mean_err,
                          (mean - mean_embedding(spec, o)).cwiseAbs().maxCoeff());
      mom_err = std::max(mom_err,
                         (mom - second_moment(spec, o)).cwiseAbs().maxCoeff());
      double el = expected_target_loss(spec, o, y);
      eloss_err = std::max(eloss_err, std::abs(eloss - el));
      double s = fy_loss_at(spec, reg, theta, y, o.prediction);
      double bound = ratio * (1.0 - q) * s +
                     q * (static_cast<double>(K) - 1.0) / static_cast<double>(K);
      lemma_viol = std::max(lemma_viol, el - bound);
      if (q > 0.0)
        floor_viol = std::max(floor_viol, q / static_cast<double>(K) - minp);
      pchosen_err = std::max(pchosen_err,
                             std::abs(o.p_chosen - pmf(spec, o, o.chosen)));
    }
  }

  add_close(out, p + "law-total-mass", mass_err, 1e-9);
  add_close(out, p + "law-mean", mean_err, 1e-9);
  add_close(out, p + "law-second-moment", mom_err, 1e-9);
  add_close(out, p + "expected-loss-enum", eloss_err, 1e-9);
  add_bound(out, p + "lemma-expected-loss", lemma_viol, 0.0, 1e-9);
  add_bound(out, p + "exploration-floor", floor_viol, 0.0, 1e-12);
  add_close(out, p + "pmf-chosen", pchosen_err, 1e-12);

  // Aligned scores collapse the law onto the target vertex.
  {
    Rng r2(derive_seed(seed, 31));
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      VertexId y = sample_uniform(spec, r2);
      Vector theta = 50.0 * (2.0 * embed(spec, y) - Vector::Ones(spec.d));
      DecodeOutcome o = randomized_decode(spec, reg, theta, r2);
      if (o.chosen != y) ok = false;
      worst = std::max(worst, 1.0 - o.p_chosen);
    }
    add(out, p + "aligned-collapse", ok && worst <= 1e-6, 1e-6 - worst,
        "1 - p " + fmt(worst));
  }

  return out;
}

std::vector<CheckResult> check_estimators(const StructureSpec& spec,
                                          const Regularizer& reg, int trials,
                                          std::uint64_t seed) {
  std::vector<CheckResult> out;
  const std::string p = spec.name + "/";
  Rng rng(seed);
  const long K = static_cast<long>(spec.card);
  const int xdim = 3;

  double iw_err = 0.0, pi_label_err = 0.0, pi_grad_err = 0.0, frob_err = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Vector theta = random_theta(spec, rng, 2.5);
    VertexId y = sample_uniform(spec, rng);
    Vector x(xdim);
    for (int i = 0; i < xdim; ++i) x[i] = rng.next_double(-1.0, 1.0);
    for (double q : {0.15, 1.0}) {
      DecodeOutcome o = rdue_decode(spec, reg, theta, q, rng);
      GradientEstimate exact = exact_gradient(spec, o, x, y);
      Matrix iw_mean = Matrix::Zero(spec.d, xdim);
      Matrix pi_mean = Matrix::Zero(spec.d, xdim);
      Vector label_mean = Vector::Zero(spec.d);
      for (long v = 0; v < K; ++v) {
        DecodeOutcome ov = with_chosen(spec, o, v);
        double pr = ov.p_chosen;
        GradientEstimate iw =
            inverse_weighted(spec, ov, x, v == static_cast<long>(y));
        iw_mean += pr * iw.g;
        frob_err = std::max(frob_err,
                            std::abs(iw.frob_sq - iw.g.squaredNorm()));
        double loss = target_loss_combinatorial(spec, v, y);
        Vector ytilde = pseudo_inverse_label(spec, ov, loss);
        label_mean += pr * ytilde;
        pi_mean += pr * pseudo_inverse_gradient(ov, x, ytilde).g;
      }
      iw_err = std::max(iw_err, (iw_mean - exact.g).cwiseAbs().maxCoeff());
      pi_label_err = std::max(
          pi_label_err, (label_mean - embed(spec, y)).cwiseAbs().maxCoeff());
      pi_grad_err = std::max(pi_grad_err,
                             (pi_mean - exact.g).cwiseAbs().maxCoeff());
    }
  }
  add_close(out, p + "iw-unbiased", iw_err, 1e-9);
  add_close(out, p + "pi-label-unbiased", pi_label_err, 1e-9);
  add_close(out, p + "pi-gradient-unbiased", pi_grad_err, 1e-9);
  add_close(out, p + "frob-sq", frob_err, 1e-12);

  {
    Matrix vi = v_inverse(spec);
    double tr = (vi * pinv(second_moment_uniform(spec)) * vi.transpose()).trace();
    add_bound(out, p + "pinv-trace-bound", tr, omega_bound(spec), 1e-6);
  }

  return out;
}

std::vector<CheckResult> check_numerics(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(seed);

  auto penrose = [](const Matrix& a) {
    Matrix x = pinv(a);
    double e = 0.0;
    e = std::max(e, (a * x * a - a).cwiseAbs().maxCoeff());
    e = std::max(e, (x * a * x - x).cwiseAbs().maxCoeff());
    e = std::max(e, ((a * x) - (a * x).transpose()).cwiseAbs().maxCoeff());
    e = std::max(e, ((x * a) - (x * a).transpose()).cwiseAbs().maxCoeff());
    return e;
  };

  double err = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    int r = 2 + static_cast<int>(rng.next_below(4));
    int c = 2 + static_cast<int>(rng.next_below(4));
    Matrix a(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) a(i, j) = rng.next_double(-2.0, 2.0);
    err = std::max(err, penrose(a));
    Vector u(r), v(c);
    for (int i = 0; i < r; ++i) u[i] = rng.next_double(-1.0, 1.0);
    for (int j = 0; j < c; ++j) v[j] = rng.next_double(-1.0, 1.0);
    err = std::max(err, penrose(u * v.transpose()));  // rank one
  }
  err = std::max(err, penrose(second_moment_uniform(make_ranking(3))));
  err = std::max(err, penrose(second_moment_uniform(make_multiclass(4))));
  add_close(out, "pinv-penrose", err, 1e-9);

  {
    Matrix a(3, 3);
    a << 2, 0.5, 0, 0.1, 1.5, 0.2, 0, 0.3, 1.0;
    add_close(out, "pinv-matches-inverse",
              (pinv(a) - a.inverse()).cwiseAbs().maxCoeff(), 1e-9);
  }

  {
    Vector big(2);
    big << 1000.0, 1000.0;
    double e = std::abs(logsumexp(big) - (1000.0 + std::log(2.0)));
    Vector mix(3);
    mix << 0.3, -0.7, 1.1;
    double naive = std::log(std::exp(0.3) + std::exp(-0.7) + std::exp(1.1));
    e = std::max(e, std::abs(logsumexp(mix) - naive));
    add_close(out, "logsumexp", e, 1e-12);
  }

  {
    Matrix w(2, 3);
    w << 3, 0, 0, 0, 4, 0;  // frobenius norm 5
    Matrix proj = project_frobenius_ball(w, 1.0);
    double e = std::abs(proj.norm() - 1.0);
    e = std::max(e, (proj * 5.0 - w).cwiseAbs().maxCoeff());
    Matrix inside = w * 0.1;
    e = std::max(e, (project_frobenius_ball(inside, 1.0) - inside)
                        .cwiseAbs()
                        .maxCoeff());
    add_close(out, "frobenius-ball-projection", e, 1e-12);
  }

  {
    Rng a(42), b(42);
    bool same = true;
    for (int i = 0; i < 100; ++i)
      if (a.next_u64() != b.next_u64()) same = false;
    add(out, "rng-deterministic", same, same ? 0.0 : -1.0);
  }
  {
    Rng r(7);
    bool ok = true;
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 10000; ++i) {
      std::uint64_t v = r.next_below(7);
      if (v >= 7) ok = false;
      else ++hits[static_cast<int>(v)];
    }
    for (int h : hits) ok = ok && h > 0;
    add(out, "rng-next-below", ok, ok ? 0.0 : -1.0);
  }
  {
    Rng r(9);
    double sum = 0.0;
    bool ok = true;
    for (int i = 0; i < 10000; ++i) {
      double u = r.next_double();
      if (u < 0.0 || u >= 1.0) ok = false;
      sum += u;
    }
    double mean = sum / 10000.0;
    add(out, "rng-double-mean", ok && std::abs(mean - 0.5) < 0.02,
        0.02 - std::abs(mean - 0.5), "mean " + fmt(mean));
  }
  add_close(out, "xlogx-zero", xlogx(0.0) + xlogx(1.0), 1e-15);

  return out;
}

std::vector<CheckResult> check_delay(std::uint64_t seed) {
  std::vector<CheckResult> out;

  {
    DelaySequence s(DelayProfile::fixed_delay(3), 10);
    bool ok = true;
    for (long t = 1; t <= 10; ++t) ok = ok && s.tau(t) == 3;
    DelaySequence z(DelayProfile::none(), 5);
    for (long t = 1; t <= 5; ++t) ok = ok && z.tau(t) == 0;
    add(out, "sequence-fixed", ok, ok ? 0.0 : -1.0);
  }
  {
    std::vector<long> trace{0, 2, 1, 7};
    DelayProfile p = DelayProfile::from_trace(trace);
    DelaySequence s(p, 4);
    bool ok = p.tau_max == 7;
    for (long t = 1; t <= 4; ++t) ok = ok && s.tau(t) == trace[t - 1];
    bool threw = false;
    try {
      DelaySequence bad(p, 5);
    } catch (const ConfigError&) {
      threw = true;
    }
    add(out, "sequence-trace", ok && threw, ok && threw ? 0.0 : -1.0);
  }
  {
    DelayProfile p = DelayProfile::uniform_random(4, seed);
    DelaySequence a(p, 200), b(p, 200);
    bool ok = true;
    bool varied = false;
    for (long t = 1; t <= 200; ++t) {
      ok = ok && a.tau(t) == b.tau(t) && a.tau(t) >= 0 && a.tau(t) <= 4;
      varied = varied || a.tau(t) != a.tau(1);
    }
    add(out, "sequence-uniform", ok && varied, ok && varied ? 0.0 : -1.0);
  }
  {
    DelayQueue<int> q;
    q.push(5, 8, 50);
    q.push(2, 8, 20);
    q.push(9, 9, 90);
    q.push(1, 12, 10);
    bool ok = q.pop_due(7).empty();
    auto due8 = q.pop_due(8);
    ok = ok && due8.size() == 2 && due8[0].origin == 2 && due8[1].origin == 5;
    auto due10 = q.pop_due(10);
    ok = ok && due10.size() == 1 && due10[0].origin == 9;
    ok = ok && q.size() == 1;  // origin 1 still pending (dropped at horizon)
    bool threw = false;
    try {
      q.push(4, 3, 0);
    } catch (const ProtocolError&) {
      threw = true;
    }
    add(out, "queue-order-and-drop", ok && threw, ok && threw ? 0.0 : -1.0);
  }

  return out;
}

std::vector<CheckResult> check_learners(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(seed);
  LearnerParams lp;
  lp.rows = 3;
  lp.cols = 2;
  lp.B = 2.0;

  auto random_grad = [&](double scale) {
    Matrix g(lp.rows, lp.cols);
    for (int i = 0; i < lp.rows; ++i)
      for (int j = 0; j < lp.cols; ++j) g(i, j) = rng.next_double(-scale, scale);
    return g;
  };

  // Pathwise certificate of adaptive projected OGD.
  {
    const long T = 400;
    auto learner = make_ogd(lp);
    double inner = 0.0, gsq = 0.0;
    Matrix gsum = Matrix::Zero(lp.rows, lp.cols);
    double in_ball_viol = -1e300;
    for (long t = 1; t <= T; ++t) {
      const Matrix& w = learner->prediction(t);
      in_ball_viol = std::max(in_ball_viol, w.norm() - lp.B * 0.5);
      Matrix g = random_grad(0.2 + 2.0 * (t % 7));
      inner += (g.array() * w.array()).sum();
      gsum += g;
      gsq += g.squaredNorm();
      learner->feedback(t, g);
    }
    double bound = std::sqrt(2.0) * lp.B * std::sqrt(lp.eps0 + gsq);
    double viol = -1e300;
    for (int k = 0; k < 10; ++k) {
      Matrix u = random_grad(1.0);
      u = project_frobenius_ball(u * lp.B, lp.B * 0.5);
      double lin = inner - (gsum.array() * u.array()).sum();
      viol = std::max(viol, lin - bound);
    }
    add_bound(out, "ogd-certificate", viol, 0.0, 1e-9);
    add_bound(out, "ogd-in-ball", in_ball_viol, 0.0, 1e-12);
  }

  // Zero delay reductions are exact, trajectory for trajectory.
  {
    auto a = make_ogd(lp);
    auto b = make_bold(lp);   // D = 0
    auto c = make_solid(lp);  // tau_max = 0
    double dmax = 0.0;
    for (long t = 1; t <= 200; ++t) {
      const Matrix& wa = a->prediction(t);
      dmax = std::max(dmax, (wa - b->prediction(t)).cwiseAbs().maxCoeff());
      dmax = std::max(dmax, (wa - c->prediction(t)).cwiseAbs().maxCoeff());
      Matrix g = random_grad(1.0 + (t % 5));
      a->feedback(t, g);
      b->feedback(t, g);
      c->feedback(t, g);
    }
    add(out, "zero-delay-reductions-exact", dmax == 0.0, -dmax,
        "max coord diff " + fmt(dmax));
  }

  // BOLD runs D+1 interleaved OGD instances.
  {
    LearnerParams bp = lp;
    bp.D = 2;
    auto bold = make_bold(bp);
    std::vector<OgdState> manual(3);
    for (auto& st : manual) st.w = Matrix::Zero(lp.rows, lp.cols);
    DelayQueue<Matrix> queue;
    double dmax = 0.0;
    for (long t = 1; t <= 40; ++t) {
      const Matrix& w = bold->prediction(t);
      dmax = std::max(
          dmax, (w - manual[static_cast<std::size_t>(t % 3)].w).cwiseAbs().maxCoeff());
      Matrix g = random_grad(1.0);
      queue.push(t, t + bp.D, g);
      for (auto& e : queue.pop_due(t)) {
        bold->feedback(e.origin, e.payload);
        ogd_step(manual[static_cast<std::size_t>(e.origin % 3)], e.payload, bp);
      }
    }
    add(out, "bold-round-robin-partition", dmax == 0.0, -dmax,
        "max coord diff " + fmt(dmax));
  }

  // SOLID's effective-delay counter against a literal recount.
  {
    LearnerParams sp = lp;
    sp.tau_max = 5;
    auto solid = std::make_unique<SolidLearner>(sp);
    DelayQueue<Matrix> queue;
    Rng drng(derive_seed(seed, 5));
    std::vector<long> origin_of, arrival_of;
    for (long t = 1; t <= 60; ++t) {
      solid->prediction(t);
      Matrix g = random_grad(0.7);
      queue.push(t, t + static_cast<long>(drng.next_below(6)), g);
      for (auto& e : queue.pop_due(t)) {
        solid->feedback(e.origin, e.payload);
        origin_of.push_back(e.origin);
        arrival_of.push_back(t);
      }
    }
    const auto& got = solid->tau_tilde_history();
    bool ok = got.size() == origin_of.size();
    for (std::size_t k = 0; ok && k < origin_of.size(); ++k) {
      long count = 0;
      for (std::size_t j = 0; j < k; ++j)
        if (arrival_of[j] < origin_of[k]) ++count;
      long want = static_cast<long>(k) - count;
      if (got[k] != want || want < 0) ok = false;
    }
    add(out, "solid-effective-delay-recount", ok, ok ? 0.0 : -1.0);
  }

  // AdaHedgeD schedule: increments clipped nonnegative, weights nondecreasing.
  {
    LearnerParams ap = lp;
    ap.D = 2;
    auto oda = std::make_unique<OdaftrlLearner>(ap);
    DelayQueue<Matrix> queue;
    double ball_viol = -1e300;
    for (long t = 1; t <= 80; ++t) {
      const Matrix& w = oda->prediction(t);
      ball_viol = std::max(ball_viol, w.norm() - ap.B * 0.5);
      Matrix g = random_grad(1.0 + (t % 4));
      queue.push(t, t + ap.D, g);
      for (auto& e : queue.pop_due(t)) oda->feedback(e.origin, e.payload);
    }
    double min_delta = 0.0;
    for (double d : oda->deltas()) min_delta = std::min(min_delta, d);
    double monotone_viol = -1e300;
    const auto& ls = oda->lambdas();
    for (std::size_t i = 1; i < ls.size(); ++i)
      monotone_viol = std::max(monotone_viol, ls[i - 1] - ls[i]);
    add_bound(out, "odaftrl-delta-nonnegative", -min_delta, 0.0, 0.0);
    add_bound(out, "odaftrl-lambda-nondecreasing", monotone_viol, 0.0, 1e-15);
    add_bound(out, "odaftrl-in-ball", ball_viol, 0.0, 1e-9);
  }

  // Protocol misuse is rejected.
  {
    bool ok = false;
    LearnerParams ap = lp;
    ap.D = 1;
    auto oda = make_odaftrl(ap);
    oda->prediction(1);
    oda->prediction(2);
    try {
      oda->feedback(2, Matrix::Zero(lp.rows, lp.cols));
    } catch (const ProtocolError&) {
      ok = true;
    }
    bool ok2 = false;
    auto solid = make_solid(lp);
    solid->prediction(1);
    try {
      solid->feedback(5, Matrix::Zero(lp.rows, lp.cols));
    } catch (const ProtocolError&) {
      ok2 = true;
    }
    add(out, "protocol-errors", ok && ok2, ok && ok2 ? 0.0 : -1.0);
  }

  return out;
}

std::vector<CheckResult> check_envs(std::uint64_t seed) {
  std::vector<CheckResult> out;

  {
    LabeledStream a = synth_multiclass(4, 2, 0.1, 200, seed);
    LabeledStream b = synth_multiclass(4, 2, 0.1, 200, seed);
    bool same = a.size() == b.size();
    for (long i = 0; same && i < a.size(); ++i)
      same = a.labels[static_cast<std::size_t>(i)] ==
                 b.labels[static_cast<std::size_t>(i)] &&
             (a.xs[static_cast<std::size_t>(i)] -
              b.xs[static_cast<std::size_t>(i)])
                     .cwiseAbs()
                     .maxCoeff() == 0.0;
    add(out, "multiclass-deterministic", same, same ? 0.0 : -1.0);

    const long sig_len = 10 * 2, noise_len = 30 * 2;
    bool ok = a.size() == 200 && a.input_dim() == sig_len + noise_len;
    double rx_seen = 0.0;
    for (long i = 0; ok && i < a.size(); ++i) {
      const Vector& x = a.xs[static_cast<std::size_t>(i)];
      rx_seen = std::max(rx_seen, x.norm());
      ok = a.labels[static_cast<std::size_t>(i)] < 4;
      long sig_ones = 0, noise_ones = 0;
      for (long j = 0; j < sig_len; ++j) sig_ones += x[j] > 0.5;
      for (long j = sig_len; j < x.size(); ++j) noise_ones += x[j] > 0.5;
      ok = ok && sig_ones >= 2 && sig_ones <= 10 && noise_ones == 10;
    }
    add(out, "multiclass-block-structure", ok && rx_seen <= a.rx + 1e-12,
        a.rx - rx_seen, "max ||x|| " + fmt(rx_seen));
  }

  {
    LabeledStream s = synth_multilabel(6, 2, 50, 50, seed);
    bool ok = s.size() == 50;
    for (long i = 0; ok && i < s.size(); ++i) {
      Vector y = embed(s.spec, s.labels[static_cast<std::size_t>(i)]);
      ok = std::abs(y.sum() - s.spec.m) < 1e-12 &&
           s.xs[static_cast<std::size_t>(i)].norm() <= 1.0 + 1e-9;
    }
    add(out, "multilabel-active-count", ok, ok ? 0.0 : -1.0);
  }

  {
    StructureSpec spec = make_multiclass(4);
    LabeledStream s = separable_stream(spec, 8, 0.5, 100, seed);
    bool ok = static_cast<bool>(s.u_star);
    double min_gap = 1e300;
    for (long i = 0; ok && i < s.size(); ++i) {
      Vector theta = (*s.u_star) * s.xs[static_cast<std::size_t>(i)];
      VertexId y = s.labels[static_cast<std::size_t>(i)];
      double own = theta.dot(embed(spec, y));
      for (std::uint64_t v = 0; v < spec.card; ++v) {
        if (v == y) continue;
        min_gap = std::min(min_gap, own - theta.dot(embed(spec, v)));
      }
    }
    add(out, "separable-margin", ok && min_gap >= 0.5 - 1e-9, min_gap - 0.5,
        "min gap " + fmt(min_gap));
  }

  {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() /
                   ("osp_idx_" + std::to_string(derive_seed(seed, 99) % 100000));
    fs::create_directories(dir);
    std::vector<std::vector<std::uint8_t>> rows;
    std::vector<std::uint8_t> labels;
    Rng r(seed);
    for (int i = 0; i < 12; ++i) {
      std::vector<std::uint8_t> row(28 * 28);
      for (auto& b : row) b = static_cast<std::uint8_t>(r.next_below(256));
      rows.push_back(std::move(row));
      labels.push_back(static_cast<std::uint8_t>(i % 10));
    }
    std::string ip = (dir / "img.idx").string(), lp = (dir / "lab.idx").string();
    write_idx_images(ip, rows, 28, 28);
    write_idx_labels(lp, labels);
    auto rrows = read_idx_images(ip);
    auto rlabels = read_idx_labels(lp);
    bool ok = rrows == rows && rlabels == labels;
    LabeledStream s = mnist_stream(ip, lp, 12, seed);
    ok = ok && s.size() == 12 && s.input_dim() == 28 * 28;
    double err = 0.0;
    // The stream shuffles; check the multiset of labels survives.
    std::vector<int> want(10, 0), got(10, 0);
    for (auto l : labels) ++want[l];
    for (auto l : s.labels) ++got[static_cast<int>(l)];
    ok = ok && want == got;
    for (long i = 0; i < s.size(); ++i) {
      const Vector& x = s.xs[static_cast<std::size_t>(i)];
      err = std::max(err, std::max(-x.minCoeff(), x.maxCoeff() - 1.0));
    }
    fs::remove_all(dir);
    add(out, "idx-roundtrip", ok && err <= 0.0, -err);
  }

  return out;
}

std::vector<CheckResult> check_harness(std::uint64_t seed) {
  std::vector<CheckResult> out;

  ExperimentConfig cfg;
  cfg.structure = "multiclass";
  cfg.d = 3;
  cfg.stream = "synth_multiclass";
  cfg.nprime = 1;
  cfg.noise = 0.1;
  cfg.horizon = 250;
  cfg.seed = seed;
  cfg.feedback = "bandit";
  cfg.estimator = "iw";
  cfg.q_policy = "fixed:0.3";
  cfg.learner = "ogd";
  cfg.B = 2.0;
  cfg.delay = "fixed:2";
  cfg.comparator = "zero";
  validate(cfg);

  {
    RepResult r = run_rep(cfg, 0, true);
    double cl = 0, cs = 0, cc = 0;
    for (const auto& row : r.rounds) {
      cl += row.loss;
      cs += row.surrogate;
      cc += row.comp_surrogate;
    }
    bool sums_ok = std::abs(cl - r.cum_loss) < 1e-9 &&
                   std::abs(cs - r.cum_surrogate) < 1e-9 &&
                   std::abs(cc - r.cum_comp_surrogate) < 1e-9;
    bool counts_ok = r.delivered + r.dropped == cfg.horizon && r.dropped == 2;
    bool regret_ok = std::abs(r.regret - (r.cum_loss - r.cum_comp_surrogate)) <
                     1e-12;
    add(out, "bandit-run-accounting", sums_ok && counts_ok && regret_ok,
        sums_ok && counts_ok && regret_ok ? 0.0 : -1.0);
    add(out, "bandit-run-lemma-clean", r.violations == 0,
        r.violations == 0 ? 0.0 : -static_cast<double>(r.violations),
        std::to_string(r.violations) + " violations");

    RepResult r2 = run_rep(cfg, 0, false);
    add(out, "run-deterministic",
        r2.cum_loss == r.cum_loss && r2.regret == r.regret,
        r2.cum_loss == r.cum_loss ? 0.0 : -1.0);
  }

  {
    ExperimentConfig pi = cfg;
    pi.structure = "multilabel";
    pi.d = 4;
    pi.m = 2;
    pi.stream = "synth_multilabel";
    pi.estimator = "pi";
    pi.q_policy = "fixed:0.25";
    pi.horizon = 150;
    pi.learner = "solid";
    pi.delay = "uniform:4";
    validate(pi);
    RepResult r = run_rep(pi, 0, false);
    bool ok = r.violations == 0 && std::isfinite(r.regret) &&
              r.delivered + r.dropped == pi.horizon;
    add(out, "pi-solid-delayed-run", ok, ok ? 0.0 : -1.0);
  }

  {
    ExperimentConfig full = cfg;
    full.feedback = "full";
    full.estimator = "exact";
    full.q_policy = "zero";
    full.delay = "none";
    full.stream = "separable";
    full.comparator = "planted";
    full.stream_n = 6;
    full.margin = 0.25;
    full.learner = "bold";
    validate(full);
    RepResult r = run_rep(full, 0, false);
    bool ok = r.violations == 0 && std::isfinite(r.regret) && r.dropped == 0;
    add(out, "full-info-planted-run", ok, ok ? 0.0 : -1.0);
  }

  {
    StructureSpec spec = make_multiclass(3);
    bool threw = false;
    try {
      resolve_exploration(parse_q_policy("theory_iw"), spec, 2.0, 1.0, 5, 0);
    } catch (const ConfigError&) {
      threw = true;
    }
    double q = resolve_exploration(parse_q_policy("theory_iw"), spec, 2.0, 1.0,
                                   100000, 0);
    double want = 2.0 * std::sqrt(3.0 / 100000.0);
    add(out, "theory-q-policy", threw && std::abs(q - want) < 1e-12,
        threw ? 0.0 : -1.0, "q " + fmt(q));
  }

  return out;
}

std::vector<std::string> suite_names() {
  return {"numerics", "structures", "losses",   "decoding", "estimators",
          "delay",    "learners",   "envs",     "harness"};
}

std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed) {
  std::vector<CheckResult> out;
  auto extend = [&](std::vector<CheckResult> v) {
    for (auto& c : v) out.push_back(std::move(c));
  };

  if (name == "numerics") return check_numerics(seed);
  if (name == "delay") return check_delay(seed);
  if (name == "learners") return check_learners(seed);
  if (name == "envs") return check_envs(seed);
  if (name == "harness") return check_harness(seed);

  if (name == "structures") {
    for (int d : {2, 3, 5}) extend(check_structure(make_multiclass(d)));
    extend(check_structure(make_multilabel(4, 2)));
    extend(check_structure(make_multilabel(5, 1)));
    extend(check_structure(make_multilabel(5, 2)));
    extend(check_structure(make_multilabel(6, 4)));  // stored complemented
    for (int m : {2, 3, 4}) extend(check_structure(make_ranking(m)));
    return out;
  }
  if (name == "losses") {
    for (const auto& spec :
         {make_multiclass(4), make_multilabel(5, 2), make_multilabel(6, 4),
          make_ranking(3)})
      extend(check_losses(spec, default_regularizer(spec), 25,
                          derive_seed(seed, 1)));
    return out;
  }
  if (name == "decoding") {
    for (const auto& spec :
         {make_multiclass(3), make_multilabel(4, 2), make_ranking(3)})
      extend(check_decoding(spec, default_regularizer(spec), 30,
                            derive_seed(seed, 2)));
    return out;
  }
  if (name == "estimators") {
    for (const auto& spec :
         {make_multiclass(3), make_multilabel(4, 2), make_ranking(3)})
      extend(check_estimators(spec, default_regularizer(spec), 10,
                              derive_seed(seed, 3)));
    return out;
  }
  throw ConfigError("verify: unknown suite '" + name + "'");
}

std::vector<CheckResult> run_all_suites(std::uint64_t seed) {
  std::vector<CheckResult> out;
  for (const auto& name : suite_names()) {
    auto v = run_suite(name, seed);
    for (auto& c : v) {
      c.name = name + "/" + c.name;
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace osp
