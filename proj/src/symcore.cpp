#include "psdaffine/symcore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace psdaffine {

namespace {

void require_same_dim(int a, int b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(int d) : m_(MatrixXd::Zero(d, d)) {
  if (d < 1) throw DomainError("SymMatrix: dimension must be positive");
}

SymMatrix::SymMatrix(const MatrixXd& m) : m_(m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DomainError("SymMatrix: matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != m(j, i)) throw DomainError("SymMatrix: matrix is not symmetric");
}

SymMatrix SymMatrix::symmetrize(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("SymMatrix::symmetrize: matrix must be square");
  MatrixXd s = 0.5 * (m + m.transpose());
  return SymMatrix(s);
}

SymMatrix SymMatrix::identity(int d) {
  SymMatrix s(d);
  s.m_.setIdentity();
  return s;
}

SymMatrix SymMatrix::diagonal(const VectorXd& diag) {
  SymMatrix s(static_cast<int>(diag.size()));
  s.m_.diagonal() = diag;
  return s;
}

void SymMatrix::set(int i, int j, double v) {
  m_(i, j) = v;
  m_(j, i) = v;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  require_same_dim(dim(), o.dim(), "SymMatrix +");
  m_ += o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  require_same_dim(dim(), o.dim(), "SymMatrix -");
  m_ -= o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// CSymMatrix

CSymMatrix::CSymMatrix(SymMatrix re) : re_(std::move(re)), im_(re_.dim()) {}

CSymMatrix::CSymMatrix(SymMatrix re, SymMatrix im) : re_(std::move(re)), im_(std::move(im)) {
  require_same_dim(re_.dim(), im_.dim(), "CSymMatrix");
}

CSymMatrix::CSymMatrix(const MatrixXcd& m) : re_(MatrixXd(m.real())), im_(MatrixXd(m.imag())) {}

CSymMatrix CSymMatrix::symmetrize(const MatrixXcd& m) {
  return CSymMatrix(SymMatrix::symmetrize(m.real()), SymMatrix::symmetrize(m.imag()));
}

CSymMatrix CSymMatrix::imaginary(const SymMatrix& w) {
  return CSymMatrix(SymMatrix(w.dim()), w);
}

MatrixXcd CSymMatrix::mat() const {
  MatrixXcd m(dim(), dim());
  m.real() = re_.mat();
  m.imag() = im_.mat();
  return m;
}

double CSymMatrix::norm() const { return std::hypot(re_.norm(), im_.norm()); }

CSymMatrix& CSymMatrix::operator+=(const CSymMatrix& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

CSymMatrix& CSymMatrix::operator-=(const CSymMatrix& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

CSymMatrix& CSymMatrix::operator*=(double s) {
  re_ *= s;
  im_ *= s;
  return *this;
}

CSymMatrix& CSymMatrix::operator*=(Complex s) {
  SymMatrix re = re_ * s.real() - im_ * s.imag();
  SymMatrix im = re_ * s.imag() + im_ * s.real();
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

MatrixXd Spectrum::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

// ---------------------------------------------------------------------------
// Inner products

double trace_inner(const SymMatrix& x, const SymMatrix& y) {
  require_same_dim(x.dim(), y.dim(), "trace_inner");
  return x.mat().cwiseProduct(y.mat()).sum();
}

Complex trace_inner(const CSymMatrix& x, const CSymMatrix& y) {
  require_same_dim(x.dim(), y.dim(), "trace_inner");
  const double re = trace_inner(x.re(), y.re()) - trace_inner(x.im(), y.im());
  const double im = trace_inner(x.re(), y.im()) + trace_inner(x.im(), y.re());
  return {re, im};
}

Complex trace_inner(const CSymMatrix& x, const SymMatrix& y) {
  return {trace_inner(x.re(), y), trace_inner(x.im(), y)};
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver

void jacobi_eigen(Eigen::Ref<MatrixXd> a, Eigen::Ref<VectorXd> w, Eigen::Ref<MatrixXd> v) {
  const Eigen::Index n = a.rows();
  if (!a.allFinite()) throw DomainError("jacobi_eigen: non-finite entries");
  v.setIdentity();
  const double scale = a.norm();
  constexpr int kMaxSweeps = 100;
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < kMaxSweeps && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0 || std::sqrt(2.0 * off) <= 1e-15 * scale) break;
    if (sweep == kMaxSweeps - 1 && std::sqrt(2.0 * off) > 1e-13 * scale)
      throw DomainError("jacobi_eigen: no convergence");

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        if (sweep > 3 && std::abs(apq) < 100.0 * kEps * std::min(std::abs(app), std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  // Insertion sort keeps this allocation-free.
  for (Eigen::Index i = 0; i < n; ++i) w(i) = a(i, i);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = i; j > 0 && w(j - 1) > w(j); --j) {
      std::swap(w(j - 1), w(j));
      v.col(j - 1).swap(v.col(j));
    }
  }
}

Spectrum eigen_sym(const SymMatrix& x) {
  MatrixXd a = x.mat();
  Spectrum s{VectorXd(x.dim()), MatrixXd(x.dim(), x.dim())};
  jacobi_eigen(a, s.eigenvalues, s.eigenvectors);
  return s;
}

double lambda_min(const SymMatrix& x) { return eigen_sym(x).eigenvalues(0); }

bool is_psd(const SymMatrix& x, double tol) {
  return lambda_min(x) >= -tol * std::max(1.0, x.norm());
}

SymMatrix psd_project(const SymMatrix& x) {
  Spectrum s = eigen_sym(x);
  s.eigenvalues = s.eigenvalues.cwiseMax(0.0);
  return SymMatrix::symmetrize(s.reconstruct());
}

SymMatrix sqrt_psd(const SymMatrix& x) {
  Spectrum s = eigen_sym(x);
  if (s.eigenvalues(0) < -kPsdTol * std::max(1.0, x.norm()))
    throw DomainError("sqrt_psd: matrix is not positive semidefinite");
  s.eigenvalues = s.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix::symmetrize(s.reconstruct());
}

MatrixXd mat_exp(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionError("mat_exp: matrix must be square");
  if (!a.allFinite()) throw DomainError("mat_exp: non-finite entries");
  static constexpr std::array<double, 14> b = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
      129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
      1323241920.0,        40840800.0,          960960.0,           16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const Eigen::Index n = a.rows();
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const MatrixXd as = a / std::ldexp(1.0, s);

  const MatrixXd ident = MatrixXd::Identity(n, n);
  const MatrixXd a2 = as * as;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd u =
      as * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident);
  const MatrixXd v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident;
  MatrixXd r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < s; ++k) r = r * r;
  return r;
}

// ---------------------------------------------------------------------------
// Trace inequalities

double riccati_quadratic_real(const CSymMatrix& x, const SymMatrix& alpha) {
  require_same_dim(x.dim(), alpha.dim(), "riccati_quadratic_real");
  const MatrixXcd xm = x.mat();
  const MatrixXcd al = alpha.mat().cast<Complex>();
  return (xm.conjugate() * xm * al * xm).trace().real();
}

LemmaBResult lemma_b_form(const CSymMatrix& b, const MatrixXcd& a) {
  require_same_dim(b.dim(), static_cast<int>(a.cols()), "lemma_b_form");
  const Complex v = (b.mat() * a.adjoint() * a).trace();
  return {v.real(), is_psd(b.re())};
}

// ---------------------------------------------------------------------------
// Boundary pairs

std::vector<BoundaryPair> boundary_pairs(int d, int nRandom, std::uint64_t seed) {
  if (d < 2) throw DomainError("boundary_pairs: requires d >= 2");
  std::vector<BoundaryPair> out;
  auto label = [](const char* kind, int i, int j) {
    std::ostringstream os;
    os << kind << '(' << i + 1 << ',' << j + 1 << ')';
    return os.str();
  };
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      SymMatrix ep(d), em(d);
      ep.set(i, i, 1.0);
      ep.set(j, j, 1.0);
      ep.set(i, j, 1.0);
      em.set(i, i, 1.0);
      em.set(j, j, 1.0);
      em.set(i, j, -1.0);
      out.push_back({ep, em, label("e+,e-", i, j)});
      out.push_back({em, ep, label("e-,e+", i, j)});
    }
  }
  for (int i = 0; i < d; ++i) {
    SymMatrix cii(d);
    cii.set(i, i, 1.0);
    out.push_back({cii, SymMatrix::identity(d) - cii, label("c,c*", i, i)});
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  std::uniform_int_distribution<int> rank(1, d - 1);
  for (int k = 0; k < nRandom; ++k) {
    const MatrixXd q = random_orthogonal(d, rng);
    const int r = rank(rng);
    VectorXd wx = VectorXd::Zero(d), wu = VectorXd::Zero(d);
    for (int i = 0; i < r; ++i) wx(i) = weight(rng);
    for (int i = r; i < d; ++i) wu(i) = weight(rng);
    SymMatrix x = SymMatrix::symmetrize(q * wx.asDiagonal() * q.transpose());
    SymMatrix u = SymMatrix::symmetrize(q * wu.asDiagonal() * q.transpose());
    std::ostringstream os;
    os << "random#" << k << "(rank " << r << ')';
    out.push_back({std::move(x), std::move(u), os.str()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vectorization

VectorXd vec_sym(const SymMatrix& x) {
  const int d = x.dim();
  VectorXd v(vec_dim(d));
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) v(k++) = (i == j) ? x(i, i) : std::sqrt(2.0) * x(i, j);
  return v;
}

SymMatrix unvec_sym(const VectorXd& v, int d) {
  if (v.size() != vec_dim(d)) throw DimensionError("unvec_sym: vector length does not match d(d+1)/2");
  SymMatrix x(d);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) x.set(i, j, (i == j) ? v(k++) : v(k++) / std::sqrt(2.0));
  return x;
}

}  // namespace psdaffine
