// Symmetric-matrix kernel: cone geometry on S_d^+, spectral operations and a
// handful of trace inequalities used by the Riccati solver.
#ifndef PSDAFFINE_SYMCORE_HPP
#define PSDAFFINE_SYMCORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace psdaffine {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Raised when an argument violates a documented precondition.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when matrix dimensions of two operands do not agree.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Real symmetric d x d matrix. Symmetry is exact: every constructor either
/// checks it or establishes it.
class SymMatrix {
public:
  SymMatrix() = default;
  explicit SymMatrix(int d);
  /// Throws DomainError unless `m` is square and exactly symmetric.
  explicit SymMatrix(const MatrixXd& m);

  /// Returns (m + m^T) / 2.
  static SymMatrix symmetrize(const MatrixXd& m);
  static SymMatrix identity(int d);
  static SymMatrix zero(int d) { return SymMatrix(d); }
  static SymMatrix diagonal(const VectorXd& diag);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  /// Sets entries (i,j) and (j,i).
  void set(int i, int j, double v);
  const MatrixXd& mat() const { return m_; }

  double trace() const { return m_.trace(); }
  double norm() const { return m_.norm(); }

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

private:
  MatrixXd m_;
};

/// Complex symmetric matrix re + i*im (symmetric, not Hermitian).
class CSymMatrix {
public:
  CSymMatrix() = default;
  explicit CSymMatrix(int d) : re_(d), im_(d) {}
  explicit CSymMatrix(SymMatrix re);
  CSymMatrix(SymMatrix re, SymMatrix im);
  /// Throws DomainError unless real and imaginary parts are exactly symmetric.
  explicit CSymMatrix(const MatrixXcd& m);
  static CSymMatrix symmetrize(const MatrixXcd& m);
  static CSymMatrix imaginary(const SymMatrix& w);

  int dim() const { return re_.dim(); }
  const SymMatrix& re() const { return re_; }
  const SymMatrix& im() const { return im_; }
  Complex operator()(int i, int j) const { return {re_(i, j), im_(i, j)}; }
  MatrixXcd mat() const;

  double norm() const;
  Complex trace() const { return {re_.trace(), im_.trace()}; }

  CSymMatrix& operator+=(const CSymMatrix& o);
  CSymMatrix& operator-=(const CSymMatrix& o);
  CSymMatrix& operator*=(double s);
  CSymMatrix& operator*=(Complex s);

  friend CSymMatrix operator+(CSymMatrix a, const CSymMatrix& b) { return a += b; }
  friend CSymMatrix operator-(CSymMatrix a, const CSymMatrix& b) { return a -= b; }
  friend CSymMatrix operator*(CSymMatrix a, double s) { return a *= s; }
  friend CSymMatrix operator*(double s, CSymMatrix a) { return a *= s; }
  friend CSymMatrix operator*(Complex s, CSymMatrix a) { return a *= s; }

private:
  SymMatrix re_;
  SymMatrix im_;
};

/// Eigenvalues ascending, eigenvectors as the columns of an orthogonal matrix.
struct Spectrum {
  VectorXd eigenvalues;
  MatrixXd eigenvectors;

  MatrixXd reconstruct() const;
};

// ---------------------------------------------------------------------------
// Inner products and norms

double trace_inner(const SymMatrix& x, const SymMatrix& y);
Complex trace_inner(const CSymMatrix& x, const CSymMatrix& y);
Complex trace_inner(const CSymMatrix& x, const SymMatrix& y);

// ---------------------------------------------------------------------------
// Spectral operations

/// Cyclic Jacobi on a symmetric matrix held in `a` (overwritten). On return
/// `w` holds eigenvalues ascending and the columns of `v` the eigenvectors.
/// No allocation happens when `w` and `v` are already sized. Throws DomainError
/// on non-finite input.
void jacobi_eigen(Eigen::Ref<MatrixXd> a, Eigen::Ref<VectorXd> w, Eigen::Ref<MatrixXd> v);

Spectrum eigen_sym(const SymMatrix& x);
double lambda_min(const SymMatrix& x);

/// Default relative slack on lambda_min for PSD membership.
inline constexpr double kPsdTol = 1e-10;

/// lambda_min(x) >= -tol * max(1, ||x||).
bool is_psd(const SymMatrix& x, double tol = kPsdTol);
/// Orthogonal projection onto S_d^+ (Frobenius norm).
SymMatrix psd_project(const SymMatrix& x);
/// Principal square root. Throws DomainError if x is not PSD within kPsdTol.
SymMatrix sqrt_psd(const SymMatrix& x);
/// Matrix exponential of a general square matrix (scaling and squaring,
/// degree-13 Pade).
MatrixXd mat_exp(const MatrixXd& a);

// ---------------------------------------------------------------------------
// Trace inequalities

/// Re tr(conj(x) x alpha x).
double riccati_quadratic_real(const CSymMatrix& x, const SymMatrix& alpha);

struct LemmaBResult {
  double value;
  bool preconditionHolds;  // Re(b) PSD within kPsdTol
};

/// Re tr(b conj(a)^T a) for a complex m x n matrix a and n x n complex
/// symmetric b. The value is returned even when Re(b) is not PSD.
LemmaBResult lemma_b_form(const CSymMatrix& b, const MatrixXcd& a);

// ---------------------------------------------------------------------------
// Boundary geometry

struct BoundaryPair {
  SymMatrix x;
  SymMatrix u;
  std::string label;
};

/// Complementary pairs x, u in S_d^+ with tr(xu) = 0: the canonical pairs
/// (e+^{ij}, e-^{ij}), (e-^{ij}, e+^{ij}), (c^{ii}, 1 - c^{ii}), followed by
/// `nRandom` pairs built from complementary column sets of a random
/// orthogonal matrix. Throws DomainError for d < 2.
std::vector<BoundaryPair> boundary_pairs(int d, int nRandom = 0, std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Isometric vectorization of S_d: coordinates (i, j), i <= j, in row-major
// upper-triangular order; off-diagonal coordinates carry a factor sqrt(2) so
// that <x, y> = vec(x) . vec(y).

inline int vec_dim(int d) { return d * (d + 1) / 2; }
VectorXd vec_sym(const SymMatrix& x);
SymMatrix unvec_sym(const VectorXd& v, int d);

/// Random orthogonal matrix (QR of a Gaussian matrix with sign fix).
template <class Rng>
MatrixXd random_orthogonal(int d, Rng& rng);

}  // namespace psdaffine

#include "psdaffine/detail/random_orthogonal.hpp"

#endif  // PSDAFFINE_SYMCORE_HPP
