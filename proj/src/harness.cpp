#include "osp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "osp/csv.hpp"
#include "osp/estimators.hpp"

namespace osp {

namespace {

namespace fs = std::filesystem;

std::vector<long> read_delay_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open delay trace: " + path);
  std::vector<long> taus;
  long v;
  while (in >> v) taus.push_back(v);
  if (!in.eof()) throw ConfigError("delay trace has non-integer entries: " + path);
  return taus;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '/' || c == ':' || c == ' ' || c == ',') c = '-';
  return s;
}

void echo_config(const ExperimentConfig& cfg, double q, const std::string& path) {
  std::ofstream out(path);
  out << "structure = " << cfg.structure << "\n"
      << "d = " << cfg.d << "\n"
      << "m = " << cfg.m << "\n"
      << "zeta = " << csv_num(cfg.zeta) << "\n"
      << "stream = " << cfg.stream << "\n"
      << "nprime = " << cfg.nprime << "\n"
      << "noise = " << csv_num(cfg.noise) << "\n"
      << "stream_n = " << cfg.stream_n << "\n"
      << "margin = " << csv_num(cfg.margin) << "\n"
      << "horizon = " << cfg.horizon << "\n"
      << "reps = " << cfg.reps << "\n"
      << "seed = " << cfg.seed << "\n"
      << "feedback = " << cfg.feedback << "\n"
      << "estimator = " << cfg.estimator << "\n"
      << "q_policy = " << cfg.q_policy << "\n"
      << "# resolved exploration rate\n"
      << "# q = " << csv_num(q) << "\n"
      << "learner = " << cfg.learner << "\n"
      << "B = " << csv_num(cfg.B) << "\n"
      << "R = " << csv_num(cfg.R) << "\n"
      << "eps0 = " << csv_num(cfg.eps0) << "\n"
      << "delay = " << cfg.delay << "\n"
      << "comparator = " << cfg.comparator << "\n"
      << "offline_passes = " << cfg.offline_passes << "\n"
      << "threads = " << cfg.threads << "\n"
      << "log_every = " << cfg.log_every << "\n";
}

}  // namespace

QPolicy parse_q_policy(const std::string& tag) {
  auto [name, arg] = split_tag(tag);
  QPolicy p;
  if (name == "zero") {
    p.kind = QPolicy::Kind::Zero;
  } else if (name == "fixed") {
    p.kind = QPolicy::Kind::Fixed;
    try {
      p.value = std::stod(arg);
    } catch (const std::exception&) {
      throw ConfigError("q_policy: bad fixed value '" + arg + "'");
    }
    if (p.value <= 0 || p.value > 1)
      throw ConfigError("q_policy: fixed q must lie in (0, 1]");
  } else if (name == "theory_iw") {
    p.kind = QPolicy::Kind::TheoryIw;
  } else if (name == "theory_pi") {
    p.kind = QPolicy::Kind::TheoryPi;
  } else if (name == "theory_pi_delayed") {
    p.kind = QPolicy::Kind::TheoryPiDelayed;
  } else {
    throw ConfigError("q_policy: unknown value '" + tag + "'");
  }
  return p;
}

double resolve_exploration(const QPolicy& policy, const StructureSpec& spec,
                           double b_diam, double rx, long horizon, long tau_max) {
  double t = static_cast<double>(horizon);
  double k = static_cast<double>(spec.card);
  double omega = omega_bound(spec);
  double q = 0.0;
  switch (policy.kind) {
    case QPolicy::Kind::Zero:
      return 0.0;
    case QPolicy::Kind::Fixed:
      return policy.value;
    case QPolicy::Kind::TheoryIw:
      q = b_diam * std::sqrt(k / t);
      if (q > 1.0)
        throw ConfigError(
            "q_policy: theory_iw needs horizon >= B^2 |Y|; got q = " +
            std::to_string(q) + " (use fixed:<q>)");
      return q;
    case QPolicy::Kind::TheoryPi:
      q = std::cbrt(4.0 * omega * b_diam * b_diam * rx * rx / t);
      if (q > 1.0)
        throw ConfigError(
            "q_policy: theory_pi needs horizon >= 4 omega B^2 Rx^2; got q = " +
            std::to_string(q) + " (use fixed:<q>)");
      return q;
    case QPolicy::Kind::TheoryPiDelayed:
      if (tau_max < 1)
        throw ConfigError("q_policy: theory_pi_delayed needs a delay bound >= 1");
      q = std::cbrt(omega * b_diam * b_diam * rx * rx *
                    static_cast<double>(tau_max) / t);
      if (q > 1.0)
        throw ConfigError(
            "q_policy: theory_pi_delayed needs horizon >= omega B^2 Rx^2 D; "
            "got q = " + std::to_string(q) + " (use fixed:<q>)");
      return q;
  }
  throw ConfigError("q_policy: unreachable");
}

DelayProfile parse_delay(const std::string& tag, std::uint64_t seed) {
  auto [name, arg] = split_tag(tag);
  if (name == "none") return DelayProfile::none();
  if (name == "fixed") return DelayProfile::fixed_delay(std::stol(arg));
  if (name == "uniform") return DelayProfile::uniform_random(std::stol(arg), seed);
  if (name == "trace") return DelayProfile::from_trace(read_delay_trace(arg));
  throw ConfigError("delay: unknown value '" + tag + "'");
}

StructureSpec structure_from_config(const ExperimentConfig& cfg) {
  if (cfg.structure == "multiclass") return make_multiclass(cfg.d);
  if (cfg.structure == "multilabel") return make_multilabel(cfg.d, cfg.m);
  if (cfg.structure == "ranking") return make_ranking(cfg.d);
  throw ConfigError("structure: unknown value '" + cfg.structure + "'");
}

Regularizer regularizer_from_config(const ExperimentConfig& cfg,
                                    const StructureSpec& spec) {
  return default_regularizer(spec, cfg.zeta);
}

LabeledStream build_stream(const ExperimentConfig& cfg, std::uint64_t stream_seed) {
  if (cfg.stream == "synth_multiclass")
    return synth_multiclass(cfg.d, cfg.nprime, cfg.noise, cfg.horizon, stream_seed);
  if (cfg.stream == "synth_multilabel")
    return synth_multilabel(cfg.d, cfg.m, cfg.stream_n, cfg.horizon, stream_seed);
  if (cfg.stream == "separable") {
    StructureSpec spec = structure_from_config(cfg);
    return separable_stream(spec, cfg.stream_n, cfg.margin, cfg.horizon,
                            stream_seed);
  }
  if (cfg.stream == "mnist")
    return mnist_stream(cfg.mnist_images, cfg.mnist_labels, cfg.horizon,
                        stream_seed);
  throw ConfigError("stream: unknown value '" + cfg.stream + "'");
}

Matrix offline_fit(const StructureSpec& spec, const Regularizer& reg,
                   const LabeledStream& stream, long horizon, double b_diam,
                   int passes, double eps0) {
  const long n = stream.size();
  Matrix w = Matrix::Zero(spec.d, stream.input_dim());
  double sum_sq = 0.0;
  for (int pass = 0; pass < passes; ++pass) {
    for (long t = 1; t <= horizon; ++t) {
      const Vector& x = stream.xs[static_cast<std::size_t>((t - 1) % n)];
      VertexId y = stream.labels[static_cast<std::size_t>((t - 1) % n)];
      Vector gtheta = surrogate_gradient(spec, reg, w * x, y);
      Matrix g = gtheta * x.transpose();
      sum_sq += g.squaredNorm();
      double eta = std::sqrt(2.0) * (b_diam * 0.5) / std::sqrt(eps0 + sum_sq);
      w -= eta * g;
      w = project_frobenius_ball(w, b_diam * 0.5);
    }
  }
  return w;
}

Matrix comparator_matrix(const ExperimentConfig& cfg, const StructureSpec& spec,
                         const Regularizer& reg, const LabeledStream& stream) {
  if (cfg.comparator == "zero")
    return Matrix::Zero(spec.d, stream.input_dim());
  if (cfg.comparator == "planted") {
    if (!stream.u_star)
      throw ConfigError("comparator: stream has no planted matrix");
    const Matrix& u = *stream.u_star;
    if (u.norm() > cfg.B * 0.5 + 1e-12)
      throw ConfigError(
          "comparator: planted matrix lies outside the B/2 ball; raise B");
    return u;
  }
  if (cfg.comparator == "offline")
    return offline_fit(spec, reg, stream, cfg.horizon, cfg.B,
                       cfg.offline_passes, cfg.eps0);
  throw ConfigError("comparator: unknown value '" + cfg.comparator + "'");
}

RepResult run_rep(const ExperimentConfig& cfg, int rep, bool keep_rounds) {
  auto t0 = std::chrono::steady_clock::now();

  StructureSpec spec = structure_from_config(cfg);
  Regularizer reg = regularizer_from_config(cfg, spec);

  std::uint64_t stream_seed = derive_seed(cfg.seed, 1000 + rep);
  std::uint64_t decode_seed = derive_seed(cfg.seed, 2000 + rep);
  std::uint64_t delay_seed = derive_seed(cfg.seed, 3000 + rep);

  LabeledStream stream = build_stream(cfg, stream_seed);
  const long n = stream.size();
  const long horizon = cfg.horizon;

  DelayProfile profile = parse_delay(cfg.delay, delay_seed);
  DelaySequence taus(profile, horizon);

  const bool bandit = cfg.feedback == "bandit";
  double q = 0.0;
  if (bandit)
    q = resolve_exploration(parse_q_policy(cfg.q_policy), spec, cfg.B, stream.rx,
                            horizon, profile.tau_max);

  LearnerParams lp;
  lp.rows = spec.d;
  lp.cols = static_cast<int>(stream.input_dim());
  lp.B = cfg.B;
  lp.R = cfg.R;
  lp.D = profile.tau_max;
  lp.tau_max = profile.tau_max;
  lp.rx = stream.rx;
  lp.ry = spec.diy;
  lp.eps0 = cfg.eps0;
  std::unique_ptr<Learner> learner;
  if (cfg.learner == "ogd") learner = make_ogd(lp);
  else if (cfg.learner == "bold") learner = make_bold(lp);
  else if (cfg.learner == "odaftrl") learner = make_odaftrl(lp);
  else if (cfg.learner == "solid") learner = make_solid(lp);
  else throw ConfigError("learner: unknown value '" + cfg.learner + "'");

  Matrix comp = comparator_matrix(cfg, spec, reg, stream);

  Rng decode_rng(decode_seed);
  DelayQueue<GradientEstimate> queue;

  const double lemma_ratio = 4.0 * spec.gamma / (reg.lambda * spec.nu);
  const double uniform_term =
      q * (static_cast<double>(spec.card) - 1.0) / static_cast<double>(spec.card);
  const bool track_cert = cfg.learner == "ogd";

  RepResult res;
  res.rep = rep;
  res.horizon = horizon;
  res.q = q;
  if (track_cert) res.cert_gsum = Matrix::Zero(lp.rows, lp.cols);

  for (long t = 1; t <= horizon; ++t) {
    const Vector& x = stream.xs[static_cast<std::size_t>((t - 1) % n)];
    VertexId y = stream.labels[static_cast<std::size_t>((t - 1) % n)];

    const Matrix& w = learner->prediction(t);
    Vector theta = w * x;

    DecodeOutcome outcome = bandit
                                ? rdue_decode(spec, reg, theta, q, decode_rng)
                                : randomized_decode(spec, reg, theta, decode_rng);

    double loss = target_loss(spec, outcome.chosen_embed, y);
    double eloss = expected_target_loss(spec, outcome, y);
    double surr = fy_loss_at(spec, reg, theta, y, outcome.prediction);
    double comp_surr = fy_loss(spec, reg, comp * x, y);

    if (eloss > lemma_ratio * (1.0 - q) * surr + uniform_term + 1e-9)
      ++res.violations;

    GradientEstimate ge;
    if (!bandit) {
      ge = exact_gradient(spec, outcome, x, y);
    } else if (cfg.estimator == "iw") {
      ge = inverse_weighted(spec, outcome, x, outcome.chosen == y);
    } else {
      Vector ytilde = pseudo_inverse_label(spec, outcome, loss);
      ge = pseudo_inverse_gradient(outcome, x, ytilde);
    }
    queue.push(t, t + taus.tau(t), std::move(ge));

    long delivered_now = 0;
    for (auto& event : queue.pop_due(t)) {
      if (track_cert) {
        const Matrix& wcur = learner->prediction(t);
        res.cert_inner += (event.payload.g.array() * wcur.array()).sum();
        res.cert_gsum += event.payload.g;
        res.cert_gsq += event.payload.frob_sq;
      }
      learner->feedback(event.origin, event.payload.g);
      ++delivered_now;
    }

    res.cum_loss += loss;
    res.cum_expected_loss += eloss;
    res.cum_surrogate += surr;
    res.cum_comp_surrogate += comp_surr;
    res.delivered += delivered_now;
    if (outcome.explored) ++res.explored_rounds;

    if (t % cfg.log_every == 0 || t == horizon) {
      res.log_t.push_back(t);
      res.log_regret.push_back(res.cum_loss - res.cum_comp_surrogate);
      res.log_surr_regret.push_back(res.cum_surrogate - res.cum_comp_surrogate);
      res.log_cum_loss.push_back(res.cum_loss);
    }

    if (keep_rounds) {
      RoundRow row;
      row.t = t;
      row.tau = taus.tau(t);
      row.p_chosen = outcome.p_chosen;
      row.explored = outcome.explored;
      row.loss = loss;
      row.expected_loss = eloss;
      row.surrogate = surr;
      row.comp_surrogate = comp_surr;
      row.cum_regret = res.cum_loss - res.cum_comp_surrogate;
      row.scale = learner->scale();
      row.delivered = delivered_now;
      row.outstanding = static_cast<long>(queue.size());
      res.rounds.push_back(row);
    }
  }

  res.regret = res.cum_loss - res.cum_comp_surrogate;
  res.surrogate_regret = res.cum_surrogate - res.cum_comp_surrogate;
  res.dropped = static_cast<long>(queue.size());
  res.final_scale = learner->scale();

  if (auto* oda = dynamic_cast<OdaftrlLearner*>(learner.get())) {
    res.odaftrl_deltas = oda->deltas();
    res.odaftrl_lambdas = oda->lambdas();
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  RunResult run;
  run.cfg = cfg;
  run.reps.resize(cfg.reps);

  const bool keep_rounds = !cfg.out.empty();
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int rep = next.fetch_add(1);
      if (rep >= cfg.reps) return;
      run.reps[static_cast<std::size_t>(rep)] =
          run_rep(cfg, rep, keep_rounds && rep == 0);
    }
  };
  int nthreads = std::min(cfg.threads, cfg.reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  run.q = run.reps.front().q;
  double sum = 0.0, sum2 = 0.0, losses = 0.0;
  for (const auto& r : run.reps) {
    sum += r.regret;
    sum2 += r.regret * r.regret;
    losses += r.cum_loss;
    run.total_violations += r.violations;
  }
  double nreps = static_cast<double>(cfg.reps);
  run.mean_regret = sum / nreps;
  run.mean_loss = losses / nreps;
  double var = sum2 / nreps - run.mean_regret * run.mean_regret;
  run.stddev_regret = std::sqrt(std::max(0.0, var));

  if (!cfg.out.empty()) {
    fs::create_directories(cfg.out);
    echo_config(cfg, run.q, cfg.out + "/config.txt");

    CsvWriter reps_csv(cfg.out + "/reps.csv",
                       {"rep", "q", "cum_loss", "cum_expected_loss",
                        "cum_surrogate", "cum_comp_surrogate", "regret",
                        "surrogate_regret", "violations", "explored",
                        "delivered", "dropped", "final_scale", "wall_seconds"});
    for (const auto& r : run.reps)
      reps_csv.write_row({csv_num(r.rep), csv_num(r.q), csv_num(r.cum_loss),
                          csv_num(r.cum_expected_loss), csv_num(r.cum_surrogate),
                          csv_num(r.cum_comp_surrogate), csv_num(r.regret),
                          csv_num(r.surrogate_regret), csv_num(r.violations),
                          csv_num(r.explored_rounds), csv_num(r.delivered),
                          csv_num(r.dropped), csv_num(r.final_scale),
                          csv_num(r.wall_seconds)});

    CsvWriter curves(cfg.out + "/curves.csv",
                     {"t", "mean_regret", "min_regret", "max_regret",
                      "mean_surrogate_regret", "mean_cum_loss"});
    const auto& ts = run.reps.front().log_t;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double mn = 1e300, mx = -1e300, avg = 0.0, avg_sr = 0.0, avg_cl = 0.0;
      for (const auto& r : run.reps) {
        double v = r.log_regret[i];
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        avg += v;
        avg_sr += r.log_surr_regret[i];
        avg_cl += r.log_cum_loss[i];
      }
      curves.write_row({csv_num(ts[i]), csv_num(avg / nreps), csv_num(mn),
                        csv_num(mx), csv_num(avg_sr / nreps),
                        csv_num(avg_cl / nreps)});
    }

    if (keep_rounds) {
      CsvWriter rounds(cfg.out + "/rounds.csv",
                       {"t", "tau", "p_chosen", "explored", "loss",
                        "expected_loss", "surrogate", "comp_surrogate",
                        "cum_regret", "scale", "delivered", "outstanding"});
      for (const auto& row : run.reps.front().rounds)
        rounds.write_row({csv_num(row.t), csv_num(row.tau), csv_num(row.p_chosen),
                          csv_num(static_cast<long>(row.explored)),
                          csv_num(row.loss), csv_num(row.expected_loss),
                          csv_num(row.surrogate), csv_num(row.comp_surrogate),
                          csv_num(row.cum_regret), csv_num(row.scale),
                          csv_num(row.delivered), csv_num(row.outstanding)});
    }
  }
  return run;
}

std::vector<RunResult> run_sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep.empty())
    throw ConfigError("sweep: config declares no sweep.<key> axes");
  if (cfg.out.empty()) throw ConfigError("sweep: needs out = <dir>");

  // Cartesian product, first axis slowest.
  std::vector<std::vector<std::string>> combos{{}};
  for (const auto& [axis, values] : cfg.sweep) {
    std::vector<std::vector<std::string>> grown;
    for (const auto& base : combos)
      for (const auto& v : values) {
        auto c = base;
        c.push_back(v);
        grown.push_back(std::move(c));
      }
    combos = std::move(grown);
  }

  fs::create_directories(cfg.out);
  CsvWriter summary(
      cfg.out + "/sweep.csv",
      [&] {
        std::vector<std::string> header;
        for (const auto& [axis, values] : cfg.sweep) header.push_back(axis);
        for (const char* s : {"q", "mean_regret", "stddev_regret", "mean_loss",
                              "violations"})
          header.push_back(s);
        return header;
      }());

  std::vector<RunResult> results;
  for (const auto& combo : combos) {
    ExperimentConfig sub = cfg;
    sub.sweep.clear();
    std::string name;
    for (std::size_t i = 0; i < combo.size(); ++i) {
      apply_key(sub, cfg.sweep[i].first, combo[i]);
      if (!name.empty()) name += "_";
      name += sanitize(cfg.sweep[i].first) + "-" + sanitize(combo[i]);
    }
    sub.out = cfg.out + "/" + name;
    RunResult run = run_experiment(sub);
    std::vector<std::string> row = combo;
    row.push_back(csv_num(run.q));
    row.push_back(csv_num(run.mean_regret));
    row.push_back(csv_num(run.stddev_regret));
    row.push_back(csv_num(run.mean_loss));
    row.push_back(csv_num(run.total_violations));
    summary.write_row(row);
    summary.flush();
    results.push_back(std::move(run));
  }
  return results;
}

void generate_data(const ExperimentConfig& cfg, const std::string& out_dir) {
  validate(cfg);
  if (out_dir.empty()) throw ConfigError("gen-data: needs out = <dir>");
  LabeledStream stream = build_stream(cfg, derive_seed(cfg.seed, 1000));
  StructureSpec spec = stream.spec;
  fs::create_directories(out_dir);

  {
    std::vector<std::string> header;
    for (long j = 0; j < stream.input_dim(); ++j)
      header.push_back("x" + std::to_string(j));
    CsvWriter features(out_dir + "/features.csv", header);
    for (const auto& x : stream.xs) {
      std::vector<std::string> row;
      row.reserve(static_cast<std::size_t>(x.size()));
      for (long j = 0; j < x.size(); ++j) row.push_back(csv_num(x[j]));
      features.write_row(row);
    }
  }
  {
    CsvWriter labels(out_dir + "/labels.csv", {"vertex_id"});
    for (VertexId v : stream.labels)
      labels.write_row({std::to_string(v)});
  }
  {
    std::vector<std::string> header;
    for (int j = 0; j < spec.d; ++j) header.push_back("y" + std::to_string(j));
    CsvWriter embeds(out_dir + "/labels_embed.csv", header);
    for (VertexId v : stream.labels) {
      Vector y = embed(spec, v);
      std::vector<std::string> row;
      for (long j = 0; j < y.size(); ++j) row.push_back(csv_num(y[j]));
      embeds.write_row(row);
    }
  }

  if (cfg.stream == "synth_multiclass") {
    // Binary features, so the byte encoding 0/255 with the reader's /255
    // scaling round-trips exactly.
    std::vector<std::vector<std::uint8_t>> rows;
    rows.reserve(stream.xs.size());
    for (const auto& x : stream.xs) {
      std::vector<std::uint8_t> r(static_cast<std::size_t>(x.size()));
      for (long j = 0; j < x.size(); ++j)
        r[static_cast<std::size_t>(j)] = x[j] > 0.5 ? 255 : 0;
      rows.push_back(std::move(r));
    }
    std::vector<std::uint8_t> lab;
    lab.reserve(stream.labels.size());
    for (VertexId v : stream.labels) lab.push_back(static_cast<std::uint8_t>(v));
    write_idx_images(out_dir + "/features.idx", rows, 1,
                     static_cast<int>(stream.input_dim()));
    write_idx_labels(out_dir + "/labels.idx", lab);
  }

  std::ofstream meta(out_dir + "/meta.txt");
  meta << "name = " << stream.name << "\n"
       << "structure = " << cfg.structure << "\n"
       << "d = " << cfg.d << "\n"
       << "m = " << cfg.m << "\n"
       << "count = " << stream.size() << "\n"
       << "input_dim = " << stream.input_dim() << "\n"
       << "rx = " << csv_num(stream.rx) << "\n"
       << "seed = " << cfg.seed << "\n";
}

}  // namespace osp
