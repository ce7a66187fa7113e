#pragma once
// Online linear learners over W in the Frobenius ball of radius B/2.
// All consume timestamped gradient matrices: feedback(origin, G) delivers the
// gradient of round `origin`; prediction(t) must be called once per round, in
// order, before that round's feedback arrives.
//
//   OgdLearner      adaptive-step projected online gradient descent
//   BoldLearner     D+1 independent OGD instances played round-robin
//   OdaftrlLearner  delayed optimistic FTRL with the AdaHedgeD regularization
//                   schedule (fixed delay D only)
//   SolidLearner    single OGD base fed in arrival order with a
//                   delay-compensated step size

#include <deque>
#include <memory>
#include <vector>

#include "osp/numerics.hpp"

namespace osp {

struct LearnerParams {
  int rows = 0;          // d
  int cols = 0;          // n
  double B = 1.0;        // comparator diameter; feasible set is the B/2 ball
  double R = -1.0;       // SOLID step scale, defaults to B/2
  long D = 0;            // fixed delay (Bold/Odaftrl)
  long tau_max = 0;      // delay upper bound (Solid)
  double rx = 1.0;       // bound on ||x_t||_2 (Solid)
  double ry = 1.0;       // structure diameter bound (Solid)
  bool project = true;   // toggle for the ball projection (OGD-family)
  double eps0 = 1e-8;    // guard added inside step-size denominators
};

class Learner {
 public:
  virtual ~Learner() = default;
  // Iterate used for round t (1-based; rounds must be consumed in order).
  virtual const Matrix& prediction(long t) = 0;
  // Gradient of round `origin`, delivered at the end of the current round.
  virtual void feedback(long origin, const Matrix& g) = 0;
  // Step size / regularization weight in effect for the current iterate.
  virtual double scale() const = 0;
};

// State of one adaptive OGD instance: W <- Proj(W - eta_t G),
// eta_t = B / sqrt(2 (eps0 + sum of squared gradient Frobenius norms)).
struct OgdState {
  Matrix w;
  double sum_sq = 0.0;
  double eta = 0.0;
};

void ogd_step(OgdState& state, const Matrix& g, const LearnerParams& p);

class OgdLearner : public Learner {
 public:
  explicit OgdLearner(const LearnerParams& p);
  const Matrix& prediction(long t) override;
  void feedback(long origin, const Matrix& g) override;
  double scale() const override { return state_.eta; }
  const OgdState& state() const { return state_; }

 private:
  LearnerParams p_;
  OgdState state_;
};

class BoldLearner : public Learner {
 public:
  explicit BoldLearner(const LearnerParams& p);
  const Matrix& prediction(long t) override;
  void feedback(long origin, const Matrix& g) override;
  double scale() const override;
  const OgdState& instance(long r) const { return instances_[r]; }

 private:
  LearnerParams p_;
  std::vector<OgdState> instances_;
  long current_ = 0;
};

class OdaftrlLearner : public Learner {
 public:
  explicit OdaftrlLearner(const LearnerParams& p);
  const Matrix& prediction(long t) override;
  void feedback(long origin, const Matrix& g) override;
  double scale() const override { return lambda_current_; }
  const std::vector<double>& deltas() const { return deltas_; }
  const std::vector<double>& lambdas() const { return lambdas_used_; }

 private:
  Matrix ball_argmin(const Matrix& gsum, double lambda) const;

  LearnerParams p_;
  double alpha_;             // B^2 / 2
  Matrix w_;                 // current iterate
  Matrix gsum_;              // sum of arrived gradients G_{1:s}
  std::deque<Matrix> window_;         // last D+1 arrived gradients
  std::deque<Matrix> predictions_;    // W_t for rounds awaiting feedback
  long next_origin_ = 1;
  long last_round_ = 0;
  std::vector<double> deltas_;        // delta_s, s = 1..
  std::vector<double> delta_cumsum_;  // prefix sums of deltas_
  std::vector<double> lambdas_used_;  // lambda in effect per round (diagnostics)
  double lambda_current_ = 0.0;
};

class SolidLearner : public Learner {
 public:
  explicit SolidLearner(const LearnerParams& p);
  const Matrix& prediction(long t) override;
  void feedback(long origin, const Matrix& g) override;
  double scale() const override { return eta_; }
  const std::vector<long>& tau_tilde_history() const { return tau_tilde_; }
  const std::vector<long>& origin_history() const { return origins_; }
  const std::vector<long>& arrival_history() const { return arrivals_; }

 private:
  LearnerParams p_;
  Matrix w_;
  long current_round_ = 0;
  std::vector<double> gnorm_;     // ||G_rho(s)||_F by feedback index
  std::vector<double> gnorm_prefix_;
  double sum_sq_ = 0.0;
  std::vector<long> origins_;     // rho(s)
  std::vector<long> arrivals_;    // round in which feedback s arrived
  std::vector<long> tau_tilde_;
  double eta_ = 0.0;
};

std::unique_ptr<Learner> make_ogd(const LearnerParams& p);
std::unique_ptr<Learner> make_bold(const LearnerParams& p);
std::unique_ptr<Learner> make_odaftrl(const LearnerParams& p);
std::unique_ptr<Learner> make_solid(const LearnerParams& p);

}  // namespace osp
