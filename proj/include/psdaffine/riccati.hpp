// Generalized Riccati system for the exponents (phi, psi) of the
// Fourier-Laplace transform
//
//   E[exp(-<u, X_t>) | X_0 = x] = exp(-phi(t,u) - <psi(t,u), x>),
//
//   d/dt phi = <b, psi> + c - sum_k w_k (exp(-<psi, xi_k>) - 1)
//   d/dt psi = -2 psi alpha psi + B^T(psi) + gamma - sum_k (exp(-<psi, xi_k>) - 1) M_k
//
// with phi(0) = 0, psi(0) = u, integrated by an adaptive Dormand-Prince 5(4)
// pair on the real/imaginary split of (psi, phi).
#ifndef PSDAFFINE_RICCATI_HPP
#define PSDAFFINE_RICCATI_HPP

#include "psdaffine/model.hpp"

#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace psdaffine {

/// Right-hand sides F (for phi) and R (for psi). In the projected form the
/// jump exponents use pi(Re psi) + i Im psi; drift and quadratic terms always
/// use psi itself.
class RiccatiRHS {
public:
  RiccatiRHS(const AffineParams& params, bool projected);
  /// Truncated form: the mu-integrand carries the compensator <chi(xi), psi>
  /// and the linear drift is B~.
  RiccatiRHS(const TruncatedParams& params, bool projected);

  int dim() const { return d_; }
  bool projected() const { return projected_; }
  /// Truncation-free parameters describing the same system.
  const AffineParams& params() const { return params_; }

  CSymMatrix psi(const CSymMatrix& u) const;
  Complex phi(const CSymMatrix& u) const;

private:
  AffineParams params_;  // truncation-free equivalent
  // What the right-hand side actually evaluates.
  LinearDrift drift_;
  std::vector<SymMatrix> compensators_;  // chi(xi_k) per mu atom, empty unless truncated
  bool projected_;
  int d_;
  MatrixXcd alpha_;

  CSymMatrix exponent_argument(const CSymMatrix& u) const;
};

/// Checked evaluation of R(u). Throws DomainError when !projected and Re(u)
/// is not PSD.
CSymMatrix rhs_psi(const AffineParams& params, const CSymMatrix& u, bool projected = false);
/// Checked evaluation of F(u).
Complex rhs_phi(const AffineParams& params, const CSymMatrix& u, bool projected = false);

struct SolverConfig {
  double relTol = 1e-9;
  double absTol = 1e-11;
  double maxStep = std::numeric_limits<double>::infinity();
  double blowupNorm = 1e8;
  /// Floor on lambda_min(Re psi) when Re(u0) is positive definite.
  double boundaryFloor = -1e-8;
  double initialStep = 0.0;  // 0 selects automatically
  long maxSteps = 2'000'000;

  void check() const;
};

enum class SolveStatus { Ok, BlowUp, StepUnderflow, MaxSteps };
const char* to_string(SolveStatus s);

struct RiccatiDiagnostics {
  SolveStatus status = SolveStatus::Ok;
  long accepted = 0;
  long rejected = 0;
  double minLambdaRe = std::numeric_limits<double>::infinity();  // min lambda_min(Re psi)
  double maxPsiNorm = 0.0;
  /// Last time reached when the integration stopped early, infinity otherwise.
  double tPlusEstimate = std::numeric_limits<double>::infinity();
  double growthConstant = 0.0;
  /// max over accepted steps of ||psi(t)|| / (exp(C t) sqrt(1 + ||u0||^2)).
  double maxGrowthRatio = 0.0;
  bool boundaryMonitored = false;
  bool boundaryViolated = false;
  /// Set when alpha is degenerate and Re tr(conj(psi) psi alpha psi) < 0 was seen.
  bool outsideProvedRegime = false;
  double minQuadraticMonitor = std::numeric_limits<double>::infinity();
  std::vector<std::string> warnings;
};

/// Solution on the accepted-step grid with dense output in between.
class RiccatiSolution {
public:
  std::vector<double> times;
  std::vector<Complex> phi;
  std::vector<CSymMatrix> psi;
  RiccatiDiagnostics diagnostics;

  bool ok() const { return diagnostics.status == SolveStatus::Ok; }
  double final_time() const { return times.back(); }
  Complex phi_final() const { return phi.back(); }
  const CSymMatrix& psi_final() const { return psi.back(); }

  /// Dense-output evaluation for t in [0, final_time()].
  Complex phi_at(double t) const;
  CSymMatrix psi_at(double t) const;

  // Internal: dense-output coefficients per accepted step.
  struct Segment {
    double t0;
    double h;
    VectorXd r1, r2, r3, r4, r5;
  };
  std::vector<Segment> segments;
  int d = 0;

private:
  VectorXd state_at(double t) const;
};

class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, SolveStatus status, double tPlus)
      : std::runtime_error(what), status_(status), tPlus_(tPlus) {}
  SolveStatus status() const { return status_; }
  double t_plus() const { return tPlus_; }

private:
  SolveStatus status_;
  double tPlus_;
};

/// Integrates the system from (0, u0) to T. Lands exactly on every
/// checkpoint in (0, T). Early termination is reported in the diagnostics,
/// not thrown.
RiccatiSolution solve(const RiccatiRHS& rhs, const CSymMatrix& u0, double T, const SolverConfig& cfg = {},
                      std::span<const double> checkpoints = {});
/// Unprojected system; requires Re(u0) PSD.
RiccatiSolution solve(const AffineParams& params, const CSymMatrix& u0, double T, const SolverConfig& cfg = {},
                      std::span<const double> checkpoints = {});
/// Projected system; Re(u0) PSD, possibly singular.
RiccatiSolution solve_boundary(const AffineParams& params, const CSymMatrix& u0, double T,
                               const SolverConfig& cfg = {}, std::span<const double> checkpoints = {});

struct BoundaryLimitRow {
  int n;
  Complex phi;      // phi_n(T)
  CSymMatrix psi;   // psi_n(T)
  double tail;      // ||psi_n(T) - psi_{n/2}(T)||, NaN for the first row
};

struct BoundaryLimit {
  RiccatiSolution solution;  // grid {0, T}: (0, u0) and the extrapolated limit
  std::vector<BoundaryLimitRow> table;
  bool tailsDecreasing = false;
  bool converged = false;
  double extrapolationError = 0.0;  // spread of the selected Richardson entry
  double maxModulus = 0.0;          // max_n |exp(-phi_n(T) - <psi_n(T), x>)| with x = I
};

/// Solves from u_n = u0 + I/n for n = 1, 2, 4, ..., nMax and extrapolates the
/// family to n -> infinity (Richardson in 1/n). No limit is claimed unless
/// the tails ||psi_{2n} - psi_n|| decrease.
BoundaryLimit boundary_limit(const AffineParams& params, const CSymMatrix& u0, double T, int nMax = 64,
                             const SolverConfig& cfg = {});

/// exp(-phi(T,u0) - <psi(T,u0), x>), dispatching to solve or solve_boundary by
/// whether Re(u0) is positive definite. Throws SolverError on early stop.
Complex transform(const AffineParams& params, const CSymMatrix& u0, const SymMatrix& x, double T,
                  const SolverConfig& cfg = {});
/// transform at u0 = i w.
Complex characteristic_function(const AffineParams& params, const SymMatrix& w, const SymMatrix& x, double T,
                                const SolverConfig& cfg = {});
/// Generator applied to f(x) = exp(-<u, x>):
/// (-F(u) - <R(u), x>) exp(-<u, x>).
Complex generator_exp(const AffineParams& params, const CSymMatrix& u, const SymMatrix& x);

/// True when Re(u) is positive definite within kPsdTol.
bool is_interior(const CSymMatrix& u);

}  // namespace psdaffine

#endif  // PSDAFFINE_RICCATI_HPP
