// Acceptance gate: one pass/fail line per criterion, exit 0 iff all pass.
// Every tolerance and tuned constant is pinned here, next to the check that
// uses it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "osp/estimators.hpp"
#include "osp/harness.hpp"
#include "osp/verify.hpp"

using namespace osp;

namespace {

constexpr double kUnbiasedTol = 1e-9;   // entrywise estimator bias
constexpr double kLemmaTol = 1e-9;      // expected-loss inequality slack
constexpr double kTraceTol = 1e-6;      // trace bound slack
constexpr double kCertTol = 1e-9;       // pathwise OGD certificate slack
constexpr double kRateDrift = 1.5;      // 5a: regret/sqrt(KT) drift < 50%
constexpr double kFlatFactor = 2.0;     // 5b: final regret vs value at T/2
constexpr double kBoldPerInstance = 10.0;  // 5b: regret budget per D+1
                                           // (measured ~3/instance, 3x headroom)

std::vector<StructureSpec> small_specs() {
  return {make_multiclass(2), make_multiclass(3), make_multiclass(5),
          make_multilabel(5, 2), make_ranking(3)};
}

Matrix ball_matrix(int rows, int cols, double radius, Rng& rng) {
  Matrix w(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w(i, j) = rng.next_double(-1.0, 1.0);
  double n = w.norm();
  if (n > 0.0) w *= radius * rng.next_double() / n;
  return w;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(3);
  ss << v;
  return ss.str();
}

// 1. Both bandit estimators match the exact gradient in expectation over the
// explicit decode distribution.
bool unbiased_estimators(std::string& detail) {
  const double q = 0.3;
  const int trials = 50;
  const int n = 4;
  Rng rng(101);
  double worst = 0.0;
  for (const StructureSpec& spec : small_specs()) {
    Regularizer reg = default_regularizer(spec);
    for (int trial = 0; trial < trials; ++trial) {
      Matrix w = ball_matrix(spec.d, n, 1.0, rng);
      Vector x(n);
      for (int j = 0; j < n; ++j) x(j) = rng.next_double(-1.0, 1.0);
      double scale = trial % 3 == 0 ? 0.3 : (trial % 3 == 1 ? 1.0 : 3.0);
      Vector theta = scale * (w * x);
      VertexId y = rng.next_below(spec.card);
      DecodeOutcome outcome = rdue_decode(spec, reg, theta, q, rng);

      Matrix exact = exact_gradient(spec, outcome, x, y).g;
      Matrix e_iw = Matrix::Zero(spec.d, n);
      Matrix e_pi = Matrix::Zero(spec.d, n);
      for (VertexId v = 0; v < spec.card; ++v) {
        DecodeOutcome played = with_chosen(spec, outcome, v);
        double pv = played.p_chosen;
        e_iw += pv * inverse_weighted(spec, played, x, v == y).g;
        double loss = target_loss_combinatorial(spec, v, y);
        Vector ytilde = pseudo_inverse_label(spec, played, loss);
        e_pi += pv * pseudo_inverse_gradient(played, x, ytilde).g;
      }
      worst = std::max(worst, (e_iw - exact).cwiseAbs().maxCoeff());
      worst = std::max(worst, (e_pi - exact).cwiseAbs().maxCoeff());
    }
  }
  detail = "max bias " + fmt(worst);
  return worst <= kUnbiasedTol;
}

// 2. Expected target loss of the decode distribution never exceeds the
// surrogate bound, computed exactly for every q.
bool lemma_inequalities(std::string& detail) {
  Rng rng(211);
  long violations = 0;
  double worst_excess = -1e300;
  for (const StructureSpec& spec : small_specs()) {
    Regularizer reg = default_regularizer(spec);
    double ratio = 4.0 * spec.gamma / (reg.lambda * spec.nu);
    double k = static_cast<double>(spec.card);
    for (int trial = 0; trial < 100; ++trial) {
      double scale = trial % 3 == 0 ? 0.5 : (trial % 3 == 1 ? 2.0 : 10.0);
      Vector theta(spec.d);
      for (int j = 0; j < spec.d; ++j) theta(j) = rng.next_double(-scale, scale);
      VertexId y = rng.next_below(spec.card);
      for (double q : {0.0, 0.1, 0.5, 1.0}) {
        DecodeOutcome outcome = rdue_decode(spec, reg, theta, q, rng);
        double eloss = expected_target_loss(spec, outcome, y);
        double surr = fy_loss_at(spec, reg, theta, y, outcome.prediction);
        double bound = ratio * (1.0 - q) * surr + q * (k - 1.0) / k;
        worst_excess = std::max(worst_excess, eloss - bound);
        if (eloss > bound + kLemmaTol) ++violations;
      }
    }
  }
  detail = "violations " + std::to_string(violations) + ", worst excess " +
           fmt(worst_excess);
  return violations == 0;
}

// 3. Label-estimate second moment: exact E tr(ytilde ytilde^T) <= omega/q on
// the small specs, and tr(V^-1 Q^+ V^-T) <= omega across the size grid.
bool trace_bounds(std::string& detail) {
  Rng rng(307);
  const double q = 0.3;
  double worst_margin = 1e300;
  for (const StructureSpec& spec : small_specs()) {
    Regularizer reg = default_regularizer(spec);
    double cap = omega_bound(spec) / q;
    for (int trial = 0; trial < 10; ++trial) {
      Vector theta(spec.d);
      for (int j = 0; j < spec.d; ++j) theta(j) = rng.next_double(-2.0, 2.0);
      VertexId y = rng.next_below(spec.card);
      DecodeOutcome outcome = rdue_decode(spec, reg, theta, q, rng);
      double e_tr = 0.0;
      for (VertexId v = 0; v < spec.card; ++v) {
        DecodeOutcome played = with_chosen(spec, outcome, v);
        double loss = target_loss_combinatorial(spec, v, y);
        Vector ytilde = pseudo_inverse_label(spec, played, loss);
        e_tr += played.p_chosen * ytilde.squaredNorm();
      }
      worst_margin = std::min(worst_margin, cap - e_tr);
      if (e_tr > cap + kTraceTol) {
        detail = spec.name + ": E tr = " + fmt(e_tr) + " > " + fmt(cap);
        return false;
      }
    }
  }

  std::vector<StructureSpec> grid;
  for (int d = 2; d <= 8; ++d) grid.push_back(make_multiclass(d));
  for (int d = 3; d <= 8; ++d)
    for (int m = 1; m <= std::min(4, d - 1); ++m) grid.push_back(make_multilabel(d, m));
  for (int m = 2; m <= 4; ++m) grid.push_back(make_ranking(m));
  for (const StructureSpec& spec : grid) {
    Matrix vinv = v_inverse(spec);
    double tr = (vinv * pinv(second_moment_uniform(spec)) * vinv.transpose()).trace();
    double omega = omega_bound(spec);
    worst_margin = std::min(worst_margin, omega - tr);
    if (tr > omega + kTraceTol) {
      detail = spec.name + ": tr = " + fmt(tr) + " > omega = " + fmt(omega);
      return false;
    }
  }
  detail = "min slack " + fmt(worst_margin);
  return true;
}

// 4. Pathwise OGD certificate on a logged 1e4-round multiclass bandit run:
// sum <G_t, W_t - U> <= sqrt(2) B sqrt(eps0 + sum ||G_t||^2) for 20 random
// feasible U and the worst feasible U.
bool ogd_certificate(std::string& detail) {
  ExperimentConfig cfg;
  cfg.structure = "multiclass";
  cfg.d = 8;
  cfg.stream = "synth_multiclass";
  cfg.nprime = 2;
  cfg.horizon = 10000;
  cfg.feedback = "bandit";
  cfg.estimator = "iw";
  cfg.q_policy = "fixed:0.2";
  cfg.seed = 11;
  RepResult rep = run_rep(cfg, 0, false);

  double bound = std::sqrt(2.0) * cfg.B * std::sqrt(cfg.eps0 + rep.cert_gsq);
  double worst_lhs = rep.cert_inner + 0.5 * cfg.B * rep.cert_gsum.norm();
  Rng rng(17);
  double max_lhs = worst_lhs;
  for (int i = 0; i < 20; ++i) {
    Matrix u = ball_matrix(static_cast<int>(rep.cert_gsum.rows()),
                           static_cast<int>(rep.cert_gsum.cols()), cfg.B * 0.5, rng);
    double lhs = rep.cert_inner - (rep.cert_gsum.array() * u.array()).sum();
    max_lhs = std::max(max_lhs, lhs);
  }
  detail = "max lhs " + fmt(max_lhs) + " vs bound " + fmt(bound);
  return max_lhs <= bound + kCertTol;
}

// 5a. sqrt(KT) consistency for the inverse-weighted multiclass bandit with the
// theory exploration rate. B sized so the ball holds a near-zero-surrogate
// comparator; the offline fit supplies it.
bool rate_multiclass(std::string& detail) {
  ExperimentConfig cfg;
  cfg.structure = "multiclass";
  cfg.d = 8;
  cfg.stream = "synth_multiclass";
  cfg.nprime = 2;
  cfg.noise = 0.0;
  cfg.feedback = "bandit";
  cfg.estimator = "iw";
  cfg.q_policy = "theory_iw";
  cfg.learner = "ogd";
  cfg.B = 32.0;
  cfg.comparator = "offline";
  cfg.reps = 10;
  cfg.threads = 4;
  cfg.seed = 21;

  double rate[2] = {0.0, 0.0};
  long horizons[2] = {10000, 40000};
  for (int i = 0; i < 2; ++i) {
    cfg.horizon = horizons[i];
    RunResult run = run_experiment(cfg);
    rate[i] = run.mean_regret /
              std::sqrt(static_cast<double>(cfg.d) * static_cast<double>(cfg.horizon));
  }
  detail = "regret/sqrt(KT) = " + fmt(rate[0]) + " at T=1e4, " + fmt(rate[1]) +
           " at T=4e4";
  if (rate[0] <= 0.0 || rate[1] <= 0.0) return false;
  double drift = std::max(rate[0], rate[1]) / std::min(rate[0], rate[1]);
  return drift <= kRateDrift;
}

// 5b. BOLD under fixed delay on the separable multilabel stream: regret
// against the planted comparator saturates in T and stays within a linear
// budget in D+1.
bool bold_delay_scaling(std::string& detail) {
  ExperimentConfig cfg;
  cfg.structure = "multilabel";
  cfg.d = 6;
  cfg.m = 2;
  cfg.stream = "separable";
  cfg.stream_n = 8;
  cfg.margin = 2.0;
  cfg.B = 14.0;  // planted comparator norm is 2 sqrt(2) sqrt(6) ~ 6.93
  cfg.learner = "bold";
  cfg.comparator = "planted";
  cfg.horizon = 20000;
  cfg.log_every = 10000;
  cfg.seed = 31;

  std::ostringstream ss;
  for (long d : {0L, 4L, 16L}) {
    cfg.delay = "fixed:" + std::to_string(d);
    RepResult rep = run_rep(cfg, 0, false);
    double r_half = rep.log_regret.front();
    double r_full = rep.log_regret.back();
    ss << "D=" << d << ": " << fmt(r_full) << " ";
    if (r_half <= 0.0 || r_full > kFlatFactor * r_half) {
      detail = ss.str() + "(not flat: half " + fmt(r_half) + ")";
      return false;
    }
    if (r_full > kBoldPerInstance * static_cast<double>(d + 1)) {
      detail = ss.str() + "(exceeds " + fmt(kBoldPerInstance) + " per instance)";
      return false;
    }
  }
  detail = ss.str();
  return true;
}

// 5c. Estimator crossover: with many labels the pseudo-inverse algorithm's
// mean cumulative loss beats inverse weighting.
bool estimator_crossover(std::string& detail) {
  ExperimentConfig cfg;
  cfg.structure = "multilabel";
  cfg.m = 5;
  cfg.stream = "synth_multilabel";
  cfg.stream_n = 64;
  cfg.feedback = "bandit";
  cfg.q_policy = "fixed:0.1";
  cfg.B = 20.0;
  cfg.horizon = 10000;
  cfg.reps = 10;
  cfg.threads = 4;
  cfg.seed = 41;

  double loss[3][2] = {};
  int dims[3] = {10, 16, 24};
  std::ostringstream ss;
  for (int i = 0; i < 3; ++i) {
    cfg.d = dims[i];
    for (int e = 0; e < 2; ++e) {
      cfg.estimator = e == 0 ? "iw" : "pi";
      RunResult run = run_experiment(cfg);
      loss[i][e] = run.mean_loss;
    }
    ss << "d=" << dims[i] << " iw " << fmt(loss[i][0]) << " pi " << fmt(loss[i][1])
       << "; ";
  }
  detail = ss.str();
  return loss[2][1] < loss[2][0];
}

// 6. Degenerate delays collapse the wrappers onto plain OGD, trajectory-exact.
bool degenerate_equivalences(std::string& detail) {
  ExperimentConfig cfg;
  cfg.structure = "multiclass";
  cfg.d = 5;
  cfg.stream = "separable";
  cfg.stream_n = 8;
  cfg.margin = 1.5;
  cfg.horizon = 1000;
  cfg.seed = 51;

  cfg.learner = "ogd";
  RepResult base = run_rep(cfg, 0, false);
  for (const char* learner : {"bold", "solid"}) {
    cfg.learner = learner;
    RepResult rep = run_rep(cfg, 0, false);
    bool same = rep.cum_loss == base.cum_loss &&
                rep.cum_surrogate == base.cum_surrogate &&
                rep.regret == base.regret && rep.final_scale == base.final_scale;
    if (!same) {
      detail = std::string(learner) + " diverges from ogd";
      return false;
    }
  }
  detail = "bold(D=0) and solid(no delay) reproduce ogd bitwise over 1e3 rounds";
  return true;
}

// 7. AdaHedgeD schedule sanity on delayed ODAFTRL runs: nonnegative increments
// and a nondecreasing regularization weight, every round.
bool odaftrl_schedule(std::string& detail) {
  ExperimentConfig full;
  full.structure = "multiclass";
  full.d = 5;
  full.stream = "separable";
  full.stream_n = 8;
  full.margin = 1.5;
  full.learner = "odaftrl";
  full.delay = "fixed:5";
  full.horizon = 2000;
  full.seed = 61;

  ExperimentConfig bandit = full;
  bandit.feedback = "bandit";
  bandit.estimator = "pi";
  bandit.q_policy = "fixed:0.2";
  bandit.delay = "fixed:3";

  long rounds = 0;
  for (const ExperimentConfig& cfg : {full, bandit}) {
    RepResult rep = run_rep(cfg, 0, false);
    if (rep.odaftrl_deltas.empty()) {
      detail = "no schedule recorded";
      return false;
    }
    for (double d : rep.odaftrl_deltas)
      if (d < 0.0) {
        detail = "negative delta " + fmt(d);
        return false;
      }
    for (size_t i = 1; i < rep.odaftrl_lambdas.size(); ++i)
      if (rep.odaftrl_lambdas[i] < rep.odaftrl_lambdas[i - 1]) {
        detail = "lambda decreased at round " + std::to_string(i + 1);
        return false;
      }
    rounds += static_cast<long>(rep.odaftrl_deltas.size());
  }
  detail = std::to_string(rounds) + " updates checked on 2 runs";
  return true;
}

// 8. The full verification battery (oracle recomputation of every derived
// constant, Penrose axioms, finite-difference gradients, protocol checks).
bool verify_suites(std::string& detail) {
  auto checks = run_all_suites(2026);
  long fails = 0;
  std::string first;
  for (const auto& c : checks)
    if (!c.pass) {
      if (fails == 0) first = c.name;
      ++fails;
    }
  if (fails > 0) {
    detail = std::to_string(fails) + " checks failed, first: " + first;
    return false;
  }
  detail = std::to_string(checks.size()) + " checks";
  return true;
}

}  // namespace

int main() {
  struct Line {
    const char* label;
    std::function<bool(std::string&)> fn;
  };
  std::vector<Line> lines = {
      {"1. estimator unbiasedness (exact law, tol 1e-9)", unbiased_estimators},
      {"2. decode expected-loss inequalities (tol 1e-9)", lemma_inequalities},
      {"3. pseudo-inverse trace bounds (tol 1e-6)", trace_bounds},
      {"4. pathwise OGD regret certificate", ogd_certificate},
      {"5. regret scaling: (a) sqrt(KT) drift, (b) BOLD O(D+1), (c) crossover",
       [](std::string& detail) {
         std::string da, db, dc;
         bool a = rate_multiclass(da);
         bool b = bold_delay_scaling(db);
         bool c = estimator_crossover(dc);
         detail = "a[" + da + "] b[" + db + "] c[" + dc + "]";
         return a && b && c;
       }},
      {"6. degenerate-delay equivalences (bitwise)", degenerate_equivalences},
      {"7. AdaHedgeD schedule checks on ODAFTRL runs", odaftrl_schedule},
      {"8. verification suites end-to-end", verify_suites},
  };

  bool all = true;
  for (const auto& line : lines) {
    auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = line.fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-4s %-68s (%.1fs; %s)\n", ok ? "PASS" : "FAIL", line.label, secs,
                detail.c_str());
    std::fflush(stdout);
    all = all && ok;
  }
  std::printf("%s\n", all ? "acceptance: 8/8 criteria pass"
                          : "acceptance: FAILED");
  return all ? 0 : 1;
}
