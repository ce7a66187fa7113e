// Learner implementations.

#include "osp/learners.hpp"

#include <algorithm>
#include <cmath>

namespace osp {

namespace {

double ball_radius(const LearnerParams& p) { return p.B * 0.5; }

}  // namespace

void ogd_step(OgdState& st, const Matrix& g, const LearnerParams& p) {
  st.sum_sq += g.squaredNorm();
  st.eta = std::sqrt(2.0) * (p.B * 0.5) / std::sqrt(p.eps0 + st.sum_sq);
  st.w -= st.eta * g;
  if (p.project) st.w = project_frobenius_ball(st.w, ball_radius(p));
}

OgdLearner::OgdLearner(const LearnerParams& p) : p_(p) {
  state_.w = Matrix::Zero(p.rows, p.cols);
}

const Matrix& OgdLearner::prediction(long) { return state_.w; }

void OgdLearner::feedback(long, const Matrix& g) { ogd_step(state_, g, p_); }

BoldLearner::BoldLearner(const LearnerParams& p) : p_(p) {
  if (p.D < 0) throw ConfigError("BOLD requires D >= 0");
  instances_.resize(p.D + 1);
  for (auto& st : instances_) st.w = Matrix::Zero(p.rows, p.cols);
}

const Matrix& BoldLearner::prediction(long t) {
  current_ = t % (p_.D + 1);
  return instances_[current_].w;
}

void BoldLearner::feedback(long origin, const Matrix& g) {
  ogd_step(instances_[origin % (p_.D + 1)], g, p_);
}

double BoldLearner::scale() const { return instances_[current_].eta; }

OdaftrlLearner::OdaftrlLearner(const LearnerParams& p) : p_(p), alpha_(p.B * p.B / 2.0) {
  if (p.D < 0) throw ConfigError("ODAFTRL requires D >= 0");
  w_ = Matrix::Zero(p.rows, p.cols);
  gsum_ = Matrix::Zero(p.rows, p.cols);
}

Matrix OdaftrlLearner::ball_argmin(const Matrix& gsum, double lambda) const {
  // argmin over the B/2 ball of <gsum, W> + (lambda/2) ||W||_F^2.
  double r = ball_radius(p_);
  double n = gsum.norm();
  if (n == 0.0) return Matrix::Zero(p_.rows, p_.cols);
  if (lambda > 0.0) {
    Matrix w = -gsum / lambda;
    double wn = n / lambda;
    if (wn > r) w *= r / wn;
    return w;
  }
  return (-r / n) * gsum;
}

const Matrix& OdaftrlLearner::prediction(long t) {
  if (t != last_round_ + 1) throw ProtocolError("predictions must be consumed in round order");
  last_round_ = t;
  predictions_.push_back(w_);
  lambdas_used_.push_back(lambda_current_);
  return predictions_.back();
}

void OdaftrlLearner::feedback(long origin, const Matrix& g) {
  if (origin != next_origin_) throw ProtocolError("ODAFTRL requires in-order feedback");
  if (predictions_.empty()) throw ProtocolError("feedback without a matching prediction");
  ++next_origin_;
  const long s = origin;

  gsum_ += g;
  window_.push_back(g);
  if (static_cast<long>(window_.size()) > p_.D + 1) window_.pop_front();

  Matrix w_s = std::move(predictions_.front());
  predictions_.pop_front();

  // lambda_s = (1/alpha) * sum_{i <= s-1-D} delta_i.
  auto prefix = [&](long k) {
    k = std::min<long>(k, static_cast<long>(delta_cumsum_.size()));
    return k <= 0 ? 0.0 : delta_cumsum_[k - 1];
  };
  double lambda_s = prefix(s - 1 - p_.D) / alpha_;

  Matrix gw = Matrix::Zero(p_.rows, p_.cols);
  for (const Matrix& gi : window_) gw += gi;
  double gn = g.norm(), gwn = gw.norm();
  double h = gwn > 0.0 ? std::min(gn / gwn, 1.0) : 1.0;

  Matrix w_bar = ball_argmin(gsum_, lambda_s);
  Matrix w_hat = ball_argmin(gsum_ - h * gw, lambda_s);
  auto f = [&](const Matrix& w) {
    return 0.5 * lambda_s * w.squaredNorm() + gsum_.cwiseProduct(w).sum();
  };
  double f_bar = f(w_bar);
  double c1 = f(w_s) - f_bar;
  double c2 = g.cwiseProduct(w_s - w_bar).sum();
  double c3 = f(w_hat) - f_bar + g.cwiseProduct(w_s - w_hat).sum();
  double delta = std::max(0.0, std::min({c1, c2, c3}));
  deltas_.push_back(delta);
  delta_cumsum_.push_back((delta_cumsum_.empty() ? 0.0 : delta_cumsum_.back()) + delta);

  // Next prediction W_{t+1}, t = s + D: uses lambda_t = prefix(s-1)/alpha and
  // the arrived gradient sum G_{1:s}.
  lambda_current_ = prefix(s - 1) / alpha_;
  w_ = ball_argmin(gsum_, lambda_current_);
}

SolidLearner::SolidLearner(const LearnerParams& p) : p_(p) {
  if (p.R <= 0.0 && p.R != -1.0) throw ConfigError("SOLID requires R > 0");
  w_ = Matrix::Zero(p.rows, p.cols);
}

const Matrix& SolidLearner::prediction(long t) {
  if (t <= current_round_) throw ProtocolError("predictions must be consumed in round order");
  current_round_ = t;
  return w_;
}

void SolidLearner::feedback(long origin, const Matrix& g) {
  if (origin > current_round_) throw ProtocolError("feedback from a future round");
  const long k = static_cast<long>(origins_.size()) + 1;

  // tau_tilde_k = (k-1) - #{earlier feedback that had already arrived before
  // round rho(k) started}; arrivals_ is nondecreasing.
  auto it = std::lower_bound(arrivals_.begin(), arrivals_.end(), origin);
  long already = static_cast<long>(it - arrivals_.begin());
  long tau_tilde = (k - 1) - already;
  if (tau_tilde < 0) throw ProtocolError("inconsistent arrival order");

  double gsq = g.squaredNorm();
  double gn = std::sqrt(gsq);
  sum_sq_ += gsq;
  gnorm_.push_back(gn);
  gnorm_prefix_.push_back((gnorm_prefix_.empty() ? 0.0 : gnorm_prefix_.back()) + gn);

  auto prefix = [&](long j) { return j <= 0 ? 0.0 : gnorm_prefix_[j - 1]; };
  double win = prefix(k - 1) - prefix(std::max<long>(k - tau_tilde, 1) - 1);
  double s = sum_sq_ + 2.0 * prefix(k) * win;
  double r = p_.R > 0.0 ? p_.R : p_.B * 0.5;
  double offset = p_.rx * p_.rx * p_.ry * p_.ry *
                  (static_cast<double>(p_.tau_max) * p_.tau_max + p_.tau_max);
  eta_ = std::sqrt(2.0) * r / (std::sqrt(p_.eps0 + s) + offset);

  w_ -= eta_ * g;
  if (p_.project) w_ = project_frobenius_ball(w_, ball_radius(p_));

  origins_.push_back(origin);
  arrivals_.push_back(current_round_);
  tau_tilde_.push_back(tau_tilde);
}

std::unique_ptr<Learner> make_ogd(const LearnerParams& p) {
  return std::make_unique<OgdLearner>(p);
}
std::unique_ptr<Learner> make_bold(const LearnerParams& p) {
  return std::make_unique<BoldLearner>(p);
}
std::unique_ptr<Learner> make_odaftrl(const LearnerParams& p) {
  return std::make_unique<OdaftrlLearner>(p);
}
std::unique_ptr<Learner> make_solid(const LearnerParams& p) {
  return std::make_unique<SolidLearner>(p);
}

}  // namespace osp
