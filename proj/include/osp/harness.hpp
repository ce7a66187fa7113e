#pragma once
// Experiment driver: plays the prediction protocol round by round, routes
// feedback through the delay queue, and accounts losses and regret against a
// fixed comparator. One RepResult per repetition; reps differ only in the
// derived seeds.

#include <cstdint>
#include <string>
#include <vector>

#include "osp/config.hpp"
#include "osp/decoding.hpp"
#include "osp/delay.hpp"
#include "osp/envs.hpp"
#include "osp/fy_loss.hpp"
#include "osp/learners.hpp"

namespace osp {

struct QPolicy {
  enum class Kind { Zero, Fixed, TheoryIw, TheoryPi, TheoryPiDelayed };
  Kind kind = Kind::Zero;
  double value = 0.0;  // Fixed only
};

QPolicy parse_q_policy(const std::string& tag);

// Exploration rate for a whole run. The theory policies refuse horizons where
// the prescribed rate would leave (0, 1]; use fixed:<q> there instead.
double resolve_exploration(const QPolicy& policy, const StructureSpec& spec,
                           double b_diam, double rx, long horizon, long tau_max);

DelayProfile parse_delay(const std::string& tag, std::uint64_t seed);

struct RoundRow {
  long t = 0;
  long tau = 0;
  double p_chosen = 0.0;
  bool explored = false;
  double loss = 0.0;           // realized target loss
  double expected_loss = 0.0;  // exact per-round expectation
  double surrogate = 0.0;      // S_t(W_t)
  double comp_surrogate = 0.0; // S_t(U)
  double cum_regret = 0.0;     // sum loss - sum comp_surrogate
  double scale = 0.0;          // learner step size / ftrl weight
  long delivered = 0;          // feedback events processed this round
  long outstanding = 0;        // queued events at end of round
};

struct RepResult {
  int rep = 0;
  long horizon = 0;
  double q = 0.0;
  double cum_loss = 0.0;
  double cum_expected_loss = 0.0;
  double cum_surrogate = 0.0;
  double cum_comp_surrogate = 0.0;
  double regret = 0.0;            // cum_loss - cum_comp_surrogate
  double surrogate_regret = 0.0;  // cum_surrogate - cum_comp_surrogate
  long violations = 0;            // expected-loss bound failures
  long explored_rounds = 0;
  long delivered = 0;
  long dropped = 0;               // feedback still queued at the horizon
  double final_scale = 0.0;
  double wall_seconds = 0.0;

  // Pathwise OGD certificate inputs: sum <G_t, W_t>, sum G_t, sum ||G_t||_F^2
  // over applied updates (ogd learner only).
  double cert_inner = 0.0;
  Matrix cert_gsum;
  double cert_gsq = 0.0;

  // AdaHedgeD diagnostics (odaftrl learner only).
  std::vector<double> odaftrl_deltas;
  std::vector<double> odaftrl_lambdas;

  // Curves sampled every log_every rounds (and at the horizon).
  std::vector<long> log_t;
  std::vector<double> log_regret;
  std::vector<double> log_surr_regret;
  std::vector<double> log_cum_loss;

  std::vector<RoundRow> rounds;  // kept for rep 0 only
};

struct RunResult {
  ExperimentConfig cfg;
  double q = 0.0;
  std::vector<RepResult> reps;
  double mean_regret = 0.0;
  double stddev_regret = 0.0;
  double mean_loss = 0.0;
  long total_violations = 0;
};

StructureSpec structure_from_config(const ExperimentConfig& cfg);
Regularizer regularizer_from_config(const ExperimentConfig& cfg,
                                    const StructureSpec& spec);
LabeledStream build_stream(const ExperimentConfig& cfg, std::uint64_t stream_seed);

// Best-response comparator: adaptive projected OGD with exact surrogate
// gradients, several passes over the realized stream.
Matrix offline_fit(const StructureSpec& spec, const Regularizer& reg,
                   const LabeledStream& stream, long horizon, double b_diam,
                   int passes, double eps0);

Matrix comparator_matrix(const ExperimentConfig& cfg, const StructureSpec& spec,
                         const Regularizer& reg, const LabeledStream& stream);

RepResult run_rep(const ExperimentConfig& cfg, int rep, bool keep_rounds);

// Runs all reps (threaded) and, when cfg.out is set, writes
// config.txt, reps.csv, curves.csv and rounds.csv under it.
RunResult run_experiment(const ExperimentConfig& cfg);

// Expands the sweep axes (cartesian product, file order), runs each combo in
// a subdirectory of cfg.out, and writes sweep.csv at the root.
std::vector<RunResult> run_sweep(const ExperimentConfig& cfg);

// Writes the configured stream to out_dir: features.csv, labels.csv,
// labels_embed.csv, meta.txt; synth_multiclass additionally as an idx pair.
void generate_data(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace osp
