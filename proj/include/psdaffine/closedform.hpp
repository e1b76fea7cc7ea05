// Semi-explicit transform of matrix-variate basic affine jump-diffusions
// (Wishart dynamics b = 2p alpha, B(x) = beta x + x beta^T, gamma = 0, c = 0,
// no state-dependent jumps, state-independent jumps m):
//
//   psi(t,u) = e^{beta^T t} (I + u sigma_t)^{-1} u e^{beta t}
//   phi(t,u) = p log det(I + u sigma_t) - int_0^t sum_k w_k (exp(-<psi(s,u), xi_k>) - 1) ds
//
// where sigma_t = 2 int_0^t e^{beta s} alpha e^{beta^T s} ds.
#ifndef PSDAFFINE_CLOSEDFORM_HPP
#define PSDAFFINE_CLOSEDFORM_HPP

#include "psdaffine/model.hpp"

#include <optional>
#include <stdexcept>

namespace psdaffine {

struct MBAJDSpec {
  int d = 0;
  SymMatrix alpha;
  MatrixXd beta;
  double p = 0.0;
  AtomicMeasure m;

  /// Throws DomainError unless p >= (d-1)/2, alpha PSD and beta is d x d.
  void check() const;
  AffineParams to_params() const;
};

/// Recovers an MBAJD description of `params` when gamma = 0, c = 0, mu is
/// empty, the drift is Lyapunov and b = 2 p alpha for a scalar p fitted by
/// least squares (relative residual <= residualTol). With alpha = 0 the
/// constant drift must vanish and p = (d-1)/2 is reported.
std::optional<MBAJDSpec> detect_mbajd(const AffineParams& params, double residualTol = 1e-10);

/// Thrown when the two routes for sigma_t disagree.
class CrossCheckError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// e^{beta t} x e^{beta^T t}.
SymMatrix flow_omega(const MatrixXd& beta, const SymMatrix& x, double t);

/// sigma_t from the off-diagonal block of exp([[beta, 2 alpha], [0, -beta^T]] t).
SymMatrix sigma_block_exp(const MatrixXd& beta, const SymMatrix& alpha, double t);
/// sigma_t by adaptive Simpson quadrature of 2 omega_s(alpha).
SymMatrix sigma_quadrature(const MatrixXd& beta, const SymMatrix& alpha, double t, double tol = 1e-11);
/// Both routes, cross-checked to 1e-8 (1 + ||sigma||); returns the block
/// exponential value. Throws CrossCheckError on disagreement.
SymMatrix sigma_integral(const MatrixXd& beta, const SymMatrix& alpha, double t);

/// Throws DomainError when I + u sigma_t is numerically singular
/// (reciprocal condition number below 1e-12).
CSymMatrix mbajd_psi(const MBAJDSpec& spec, const CSymMatrix& u, double t);
/// Throws DomainError on branch ambiguity of log det(I + u sigma_s).
Complex mbajd_phi(const MBAJDSpec& spec, const CSymMatrix& u, double t);

/// p log det(I + u sigma_t) on the branch continuous from s = 0.
Complex mbajd_log_det_term(const MBAJDSpec& spec, const CSymMatrix& u, double t);

/// exp(-phi - <psi, x>) for an MBAJD (jumps allowed).
Complex mbajd_transform(const MBAJDSpec& spec, const CSymMatrix& u, const SymMatrix& x, double t);
/// Same for a Wishart process; throws DomainError unless m is empty.
Complex wishart_transform(const MBAJDSpec& spec, const CSymMatrix& u, const SymMatrix& x, double t);

}  // namespace psdaffine

#endif  // PSDAFFINE_CLOSEDFORM_HPP
