#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "loopgas/util.hpp"

namespace loopgas {

// Pfaffian of a real skew-symmetric matrix by Parlett-Reid tridiagonalization
// with partial pivoting. Returned in log-magnitude/sign form; the value is the
// product of the (2k, 2k+1) pivots times the swap parity.
inline LogValue pfaffian_log(Eigen::MatrixXd a) {
  const auto n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("pfaffian: matrix not square");
  if (n == 0) return {0.0, 1};
  if (n % 2 != 0) return LogValue::zero();
  double scale = a.cwiseAbs().maxCoeff();
  if ((a + a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("pfaffian: matrix not skew-symmetric");

  LogValue out{0.0, 1};
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    Eigen::Index kp = k + 1;
    double best = std::abs(a(k + 1, k));
    for (Eigen::Index i = k + 2; i < n; ++i)
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        kp = i;
      }
    if (kp != k + 1) {
      a.row(kp).swap(a.row(k + 1));
      a.col(kp).swap(a.col(k + 1));
      out.sign = -out.sign;
    }
    double piv = a(k, k + 1);
    if (piv == 0.0) return LogValue::zero();
    out.log_abs += std::log(std::abs(piv));
    if (piv < 0.0) out.sign = -out.sign;
    if (k + 2 < n) {
      Eigen::VectorXd tau = a.row(k).segment(k + 2, n - k - 2) / piv;
      Eigen::VectorXd col = a.col(k + 1).segment(k + 2, n - k - 2);
      a.bottomRightCorner(n - k - 2, n - k - 2).noalias() +=
          tau * col.transpose() - col * tau.transpose();
    }
  }
  return out;
}

inline double pfaffian(const Eigen::MatrixXd& a) { return pfaffian_log(a).value(); }

}  // namespace loopgas
