#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "loopgas/util.hpp"

namespace loopgas {

using Cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline void require_density_matrix(const CMatrix& rho, const char* who) {
  if (rho.rows() != rho.cols() || rho.rows() < 1 || rho.rows() > 64)
    throw std::invalid_argument(std::string(who) + ": need a square matrix, dim <= 64");
  double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not Hermitian");
  if (std::abs(rho.trace() - Cplx(1.0, 0.0)) > 1e-10)
    throw std::invalid_argument(std::string(who) + ": trace must be 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not positive semidefinite");
}

// Numerical null modes must come out exactly zero: the square root otherwise
// turns eigenvalue noise of order eps into sqrt(eps)-size artifacts.
inline CMatrix matrix_sqrt_psd(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  double cut = 1e-12 * lam.maxCoeff();
  for (int i = 0; i < lam.size(); ++i)
    if (lam[i] < cut) lam[i] = 0.0;
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

// Uhlmann fidelity F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2,
// evaluated as the squared nuclear norm of sqrt(rho) sqrt(sigma): singular
// values come out directly, without the sqrt of a computed eigenvalue.
inline double fidelity_direct(const CMatrix& rho, const CMatrix& sigma) {
  require_density_matrix(rho, "fidelity_direct");
  require_density_matrix(sigma, "fidelity_direct");
  if (rho.rows() != sigma.rows())
    throw std::invalid_argument("fidelity_direct: dimension mismatch");
  CMatrix prod = matrix_sqrt_psd(rho) * matrix_sqrt_psd(sigma);
  Eigen::JacobiSVD<CMatrix> svd(prod);
  KahanSum tr;
  for (int i = 0; i < svd.singularValues().size(); ++i) tr.add(svd.singularValues()[i]);
  double f = tr.value();
  return f * f;
}

// The dephasing ops: full-dimension Hermitian involutions that commute
// pairwise, so the joint +-1 eigenprojectors form an orthogonal resolution.
inline void require_involutions(const std::vector<CMatrix>& ops, Eigen::Index dim,
                                const char* who) {
  if (ops.empty()) throw std::invalid_argument(std::string(who) + ": need at least one op");
  CMatrix id = CMatrix::Identity(dim, dim);
  for (const auto& o : ops) {
    if (o.rows() != dim || o.cols() != dim)
      throw std::invalid_argument(std::string(who) + ": op dimension mismatch");
    if ((o - o.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument(std::string(who) + ": op is not Hermitian");
    if ((o * o - id).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument(std::string(who) + ": op is not an involution");
  }
  for (size_t i = 0; i < ops.size(); ++i)
    for (size_t j = i + 1; j < ops.size(); ++j)
      if ((ops[i] * ops[j] - ops[j] * ops[i]).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument(std::string(who) + ": ops do not commute");
}

// rho -> prod_j [(1-p) rho + p O_j rho O_j], one factor per op.
inline CMatrix partial_dephasing(CMatrix rho, const std::vector<CMatrix>& ops, double p) {
  if (p < 0.0 || p > 0.5)
    throw std::invalid_argument("partial_dephasing: need p in [0, 1/2]");
  require_involutions(ops, rho.rows(), "partial_dephasing");
  for (const auto& o : ops) rho = (1.0 - p) * rho + p * o * rho * o;
  return rho;
}

inline CMatrix maximal_dephasing(const CMatrix& rho, const std::vector<CMatrix>& ops) {
  return partial_dephasing(rho, ops, 0.5);
}

// F' = sum_s |<psi_s|phi_s>| over the 2^m joint sign sectors, with
// |psi_s> = P_s |psi>. For states fully dephased by these ops this equals
// sqrt(F); the identity is verified internally against fidelity_direct.
inline double fidelity_projector_formula(const CVector& psi, const CVector& phi,
                                         const std::vector<CMatrix>& ops,
                                         bool check_against_direct = true) {
  Eigen::Index dim = psi.size();
  if (phi.size() != dim)
    throw std::invalid_argument("fidelity_projector_formula: dimension mismatch");
  if (dim < 1 || dim > 64)
    throw std::invalid_argument("fidelity_projector_formula: need dim <= 64");
  require_involutions(ops, dim, "fidelity_projector_formula");
  size_t m = ops.size();
  if (m > 12)
    throw std::invalid_argument("fidelity_projector_formula: too many ops");
  CMatrix id = CMatrix::Identity(dim, dim);
  KahanSum total;
  for (size_t s = 0; s < (size_t(1) << m); ++s) {
    CVector ps = psi, ph = phi;
    for (size_t j = 0; j < m; ++j) {
      double sign = ((s >> j) & 1) ? -1.0 : 1.0;
      ps = (ps + sign * (ops[j] * ps)) / 2.0;
      ph = (ph + sign * (ops[j] * ph)) / 2.0;
    }
    total.add(std::abs(ps.dot(ph)));
  }
  double fprime = total.value();
  if (check_against_direct) {
    CMatrix rho = maximal_dephasing(psi * psi.adjoint(), ops);
    CMatrix sig = maximal_dephasing(phi * phi.adjoint(), ops);
    double direct = std::sqrt(fidelity_direct(rho, sig));
    if (std::abs(fprime - direct) > 1e-8)
      throw std::runtime_error("fidelity_projector_formula: mismatch with direct fidelity");
  }
  return fprime;
}

}  // namespace loopgas
