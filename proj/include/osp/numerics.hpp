#pragma once
// Small dense-linear-algebra helpers on top of Eigen.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

namespace osp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Moore-Penrose pseudo-inverse via SVD; singular values below rcond * s_max
// are treated as zero.
template <typename Derived>
Matrix pinv(const Eigen::MatrixBase<Derived>& a, double rcond = 1e-10) {
  Eigen::JacobiSVD<Matrix> svd(a.derived(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return Matrix::Zero(a.cols(), a.rows());
  double cutoff = rcond * s(0);
  Vector sinv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) sinv(i) = 1.0 / s(i);
  return svd.matrixV() * sinv.asDiagonal() * svd.matrixU().transpose();
}

// Euclidean projection onto the Frobenius ball of given radius.
template <typename Derived>
Matrix project_frobenius_ball(const Eigen::MatrixBase<Derived>& w, double radius) {
  double n = w.norm();
  if (n <= radius) return w.derived();
  return w.derived() * (radius / n);
}

template <typename Derived>
double logsumexp(const Eigen::MatrixBase<Derived>& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace osp
