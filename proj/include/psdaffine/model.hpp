// Parameter sets of affine processes on S_d^+, finite-activity jump measures,
// admissibility validation and the truncation-function conversion.
#ifndef PSDAFFINE_MODEL_HPP
#define PSDAFFINE_MODEL_HPP

#include "psdaffine/symcore.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace psdaffine {

/// B(x) = beta x + x beta^T.
struct LyapunovDrift {
  MatrixXd beta;
};

/// B(x) = unvec(matrix * vec(x)) in the isometric vectorization of S_d.
struct GeneralDrift {
  MatrixXd matrix;
};

class LinearDrift {
public:
  LinearDrift() = default;
  LinearDrift(LyapunovDrift l);
  LinearDrift(GeneralDrift g);

  static LinearDrift lyapunov(const MatrixXd& beta) { return LinearDrift(LyapunovDrift{beta}); }
  static LinearDrift general(const MatrixXd& matrix) { return LinearDrift(GeneralDrift{matrix}); }
  static LinearDrift zero(int d) { return lyapunov(MatrixXd::Zero(d, d)); }

  int dim() const { return d_; }
  bool is_lyapunov() const { return std::holds_alternative<LyapunovDrift>(rep_); }
  const LyapunovDrift* as_lyapunov() const { return std::get_if<LyapunovDrift>(&rep_); }
  const GeneralDrift* as_general() const { return std::get_if<GeneralDrift>(&rep_); }

  /// The D x D matrix of the map in the isometric vectorization.
  MatrixXd vectorized() const;
  /// Same map, always in General form.
  LinearDrift to_general() const;

private:
  std::variant<LyapunovDrift, GeneralDrift> rep_{LyapunovDrift{}};
  int d_ = 0;
};

SymMatrix apply_drift(const LinearDrift& B, const SymMatrix& x);
/// Adjoint with respect to the trace inner product.
SymMatrix apply_drift_adjoint(const LinearDrift& B, const SymMatrix& u);
CSymMatrix apply_drift_adjoint(const LinearDrift& B, const CSymMatrix& u);

struct ScalarAtom {
  SymMatrix xi;
  double weight;
};

struct MatrixAtom {
  SymMatrix xi;
  SymMatrix weightMatrix;
};

/// State-independent jump measure m = sum_k w_k delta_{xi_k}.
struct AtomicMeasure {
  std::vector<ScalarAtom> atoms;
  bool empty() const { return atoms.empty(); }
  double total_mass() const;
};

/// State-dependent jump coefficient mu = sum_k M_k delta_{xi_k}; the jump
/// intensity at state x is <x, M_k>.
struct MatrixAtomicMeasure {
  std::vector<MatrixAtom> atoms;
  bool empty() const { return atoms.empty(); }
};

enum class AlphaClass { Zero, Invertible, DegenerateNonzero };

const char* to_string(AlphaClass c);
AlphaClass classify_alpha(const SymMatrix& alpha, double tol = kPsdTol);

/// Admissible parameter set (alpha, b, B, c, gamma, m, mu) without a
/// truncation function. The constructor does not validate; use validate().
struct AffineParams {
  int d = 0;
  SymMatrix alpha;
  SymMatrix b;
  LinearDrift B;
  double c = 0.0;
  SymMatrix gamma;
  AtomicMeasure m;
  MatrixAtomicMeasure mu;

  AlphaClass alpha_class() const { return classify_alpha(alpha); }
  bool conservative() const { return c == 0.0 && gamma.norm() == 0.0; }

  /// Zero parameters of dimension d.
  static AffineParams zero(int d);
};

/// Truncation function chi(xi) = xi * min(1, 1/||xi||).
SymMatrix truncation_chi(const SymMatrix& xi);

/// Same parameters with drift B~ compensated by the truncation function; the
/// mu-jump part of the generator reads f(x+xi) - f(x) - <chi(xi), grad f(x)>.
struct TruncatedParams {
  int d = 0;
  SymMatrix alpha;
  SymMatrix b;
  LinearDrift Btilde;
  double c = 0.0;
  SymMatrix gamma;
  AtomicMeasure m;
  MatrixAtomicMeasure mu;
};

/// B(x) = B~(x) - sum_k <M_k, x> chi(xi_k). With mu empty the drift is returned
/// unchanged (Lyapunov form is preserved).
AffineParams detruncate(const TruncatedParams& tp);
/// Inverse of detruncate: B~(x) = B(x) + sum_k <M_k, x> chi(xi_k).
TruncatedParams retruncate(const AffineParams& p);

// ---------------------------------------------------------------------------
// Admissibility

struct InwardResult {
  bool pass = true;
  double worstValue = 0.0;
  std::optional<BoundaryPair> worstPair;
  std::size_t pairsChecked = 0;
};

/// min over pairs of <B(x), u> >= -tol. Throws DomainError if a pair is not
/// complementary (|<x,u>| > 1e-8).
InwardResult inward_pointing_check(const LinearDrift& B, const std::vector<BoundaryPair>& pairs, double tol);

struct CheckResult {
  std::string name;
  bool pass;
  double value;      // measured quantity (e.g. lambda_min)
  double threshold;  // pass iff value >= threshold
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  AlphaClass alphaClass = AlphaClass::Zero;
  std::vector<std::string> warnings;
  std::size_t pairsChecked = 0;

  bool ok() const;
  const CheckResult* find(const std::string& name) const;
};

ValidationReport validate(const AffineParams& params, int nRandomPairs = 64, double tol = 1e-10,
                          std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Jump integrals and growth bound

/// sum_k w_k (exp(-<u, xi_k>) - 1). Throws DomainError unless Re(u) is PSD.
Complex jump_transform_m(const AtomicMeasure& m, const CSymMatrix& u);
/// sum_k (exp(-<u, xi_k>) - 1) M_k. Throws DomainError unless Re(u) is PSD.
CSymMatrix jump_transform_mu(const MatrixAtomicMeasure& mu, const CSymMatrix& u);

/// Same sums without the domain check (used where Re(u) has already been
/// projected or rounding may push it slightly outside the cone).
Complex jump_sum_m(const AtomicMeasure& m, const CSymMatrix& u);
CSymMatrix jump_sum_mu(const MatrixAtomicMeasure& mu, const CSymMatrix& u);

struct GrowthConstant {
  double driftNorm;  // operator norm of B^T in the isometric vectorization
  double c1;         // sum_k (||xi_k|| ^ 1) tr(M_k)
  double c2;         // 2 sum_{||xi_k|| > 1} tr(M_k)
  double gammaNorm;
  double value;      // driftNorm + c1 + (gammaNorm + c2) / 2
};

/// Constant C with ||psi(t,u)|| <= exp(C t) sqrt(1 + ||u||^2).
GrowthConstant growth_constant(const AffineParams& params);

/// Largest singular value, from the top eigenvalue of A^T A.
double operator_norm(const MatrixXd& a);

}  // namespace psdaffine

#endif  // PSDAFFINE_MODEL_HPP
