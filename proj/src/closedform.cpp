#include "psdaffine/closedform.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace psdaffine {

namespace {

template <class T>
double size_of(const T& v) {
  if constexpr (std::is_same_v<T, Complex>)
    return std::abs(v);
  else
    return v.norm();
}

/// Adaptive Simpson with Richardson correction on [a, b].
template <class T, class F>
T simpson_rec(const F& f, double a, double b, const T& fa, const T& fm, const T& fb, const T& whole, double tol,
              int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const T flm = f(lm);
  const T frm = f(rm);
  const T left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const T right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const T both = left + right;
  const T delta = both - whole;
  if (depth <= 0 || size_of(delta) <= 15.0 * tol) return both + delta / 15.0;
  return simpson_rec<T>(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec<T>(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class T, class F>
T adaptive_simpson(const F& f, double a, double b, double tol) {
  // Split into a few panels first so that the initial estimate cannot be
  // accidentally exact on an oscillating integrand.
  constexpr int kPanels = 4;
  const double w = (b - a) / kPanels;
  T total = f(a) * 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * w;
    const double hi = (i + 1 == kPanels) ? b : lo + w;
    const T fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
    const T whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total = total + simpson_rec<T>(f, lo, hi, fa, fm, fb, whole, tol / kPanels, 40);
  }
  return total;
}

MatrixXcd to_complex(const MatrixXd& m) { return m.cast<Complex>(); }

/// psi from a precomputed sigma_t.
CSymMatrix psi_from_sigma(const MatrixXd& beta, const CSymMatrix& u, const SymMatrix& sigma, double t) {
  const int d = u.dim();
  const MatrixXcd um = u.mat();
  const MatrixXcd a = MatrixXcd::Identity(d, d) + um * to_complex(sigma.mat());
  Eigen::PartialPivLU<MatrixXcd> lu(a);
  if (!(lu.rcond() > 1e-12)) throw DomainError("mbajd_psi: I + u sigma_t is numerically singular");
  const MatrixXcd e = to_complex(mat_exp(beta * t));
  return CSymMatrix::symmetrize(e.transpose() * lu.solve(um) * e);
}

Complex jump_rate(const AtomicMeasure& m, const CSymMatrix& psi) {
  // -sum_k w_k (exp(-<psi, xi_k>) - 1)
  return -jump_sum_m(m, psi);
}

}  // namespace

void MBAJDSpec::check() const {
  if (d < 1 || alpha.dim() != d || beta.rows() != d || beta.cols() != d)
    throw DimensionError("MBAJDSpec: inconsistent dimensions");
  if (p < 0.5 * (d - 1) - 1e-12) throw DomainError("MBAJDSpec: p must satisfy p >= (d-1)/2");
  if (!is_psd(alpha)) throw DomainError("MBAJDSpec: alpha must be positive semidefinite");
}

AffineParams MBAJDSpec::to_params() const {
  AffineParams params = AffineParams::zero(d);
  params.alpha = alpha;
  params.b = alpha * (2.0 * p);
  params.B = LinearDrift::lyapunov(beta);
  params.m = m;
  return params;
}

std::optional<MBAJDSpec> detect_mbajd(const AffineParams& params, double residualTol) {
  if (params.c != 0.0 || params.gamma.norm() != 0.0 || !params.mu.empty()) return std::nullopt;
  const auto* lyap = params.B.as_lyapunov();
  if (lyap == nullptr) return std::nullopt;
  MBAJDSpec spec;
  spec.d = params.d;
  spec.alpha = params.alpha;
  spec.beta = lyap->beta;
  spec.m = params.m;
  const SymMatrix twoAlpha = params.alpha * 2.0;
  const double denom = trace_inner(twoAlpha, twoAlpha);
  if (denom == 0.0) {
    if (params.b.norm() > residualTol) return std::nullopt;
    spec.p = 0.5 * (params.d - 1);
    return spec;
  }
  spec.p = trace_inner(params.b, twoAlpha) / denom;
  const double resid = (params.b - twoAlpha * spec.p).norm();
  if (resid > residualTol * std::max(1.0, params.b.norm())) return std::nullopt;
  if (spec.p < 0.5 * (params.d - 1) - 1e-12) return std::nullopt;
  return spec;
}

SymMatrix flow_omega(const MatrixXd& beta, const SymMatrix& x, double t) {
  const MatrixXd e = mat_exp(beta * t);
  return SymMatrix::symmetrize(e * x.mat() * e.transpose());
}

SymMatrix sigma_block_exp(const MatrixXd& beta, const SymMatrix& alpha, double t) {
  if (t < 0.0) throw DomainError("sigma: t must be nonnegative");
  const auto d = beta.rows();
  MatrixXd c = MatrixXd::Zero(2 * d, 2 * d);
  c.topLeftCorner(d, d) = beta;
  c.topRightCorner(d, d) = 2.0 * alpha.mat();
  c.bottomRightCorner(d, d) = -beta.transpose();
  const MatrixXd e = mat_exp(c * t);
  // E12(t) = int_0^t e^{beta (t-s)} 2 alpha e^{-beta^T s} ds, so
  // E12 e^{beta^T t} = 2 int_0^t e^{beta r} alpha e^{beta^T r} dr.
  return SymMatrix::symmetrize(e.topRightCorner(d, d) * e.topLeftCorner(d, d).transpose());
}

SymMatrix sigma_quadrature(const MatrixXd& beta, const SymMatrix& alpha, double t, double tol) {
  if (t < 0.0) throw DomainError("sigma: t must be nonnegative");
  if (t == 0.0) return SymMatrix(alpha.dim());
  auto f = [&](double s) -> MatrixXd { return 2.0 * flow_omega(beta, alpha, s).mat(); };
  return SymMatrix::symmetrize(adaptive_simpson<MatrixXd>(f, 0.0, t, tol));
}

SymMatrix sigma_integral(const MatrixXd& beta, const SymMatrix& alpha, double t) {
  const SymMatrix a = sigma_block_exp(beta, alpha, t);
  const SymMatrix b = sigma_quadrature(beta, alpha, t);
  const double gap = (a - b).norm();
  if (gap > 1e-8 * (1.0 + a.norm())) {
    std::ostringstream os;
    os << "sigma_integral: block-exponential and quadrature disagree by " << gap;
    throw CrossCheckError(os.str());
  }
  return a;
}

CSymMatrix mbajd_psi(const MBAJDSpec& spec, const CSymMatrix& u, double t) {
  spec.check();
  if (u.dim() != spec.d) throw DimensionError("mbajd_psi: dimension mismatch");
  if (t == 0.0) return u;
  return psi_from_sigma(spec.beta, u, sigma_integral(spec.beta, spec.alpha, t), t);
}

Complex mbajd_log_det_term(const MBAJDSpec& spec, const CSymMatrix& u, double t) {
  spec.check();
  if (t == 0.0 || spec.p == 0.0) return 0.0;
  const int d = spec.d;
  const MatrixXcd um = u.mat();
  auto det_at = [&](double s) {
    const SymMatrix sig = sigma_block_exp(spec.beta, spec.alpha, s);
    return (MatrixXcd::Identity(d, d) + um * to_complex(sig.mat())).determinant();
  };

  // Unwrap arg det along a grid from s = 0, where det = 1, refining until
  // every increment stays well inside (-pi, pi).
  constexpr double kMaxIncrement = std::numbers::pi / 4.0;
  for (int n = 32; n <= (1 << 16); n *= 2) {
    double arg = 0.0;
    Complex prev = 1.0;
    bool fine = true;
    for (int k = 1; k <= n; ++k) {
      const Complex cur = det_at(t * k / n);
      if (cur == 0.0) throw DomainError("mbajd_phi: det(I + u sigma_s) vanishes");
      const double inc = std::arg(cur / prev);
      if (std::abs(inc) > kMaxIncrement) {
        fine = false;
        break;
      }
      arg += inc;
      prev = cur;
    }
    if (fine) return spec.p * Complex(std::log(std::abs(prev)), arg);
  }
  throw DomainError("mbajd_phi: branch of log det could not be resolved");
}

Complex mbajd_phi(const MBAJDSpec& spec, const CSymMatrix& u, double t) {
  if (u.dim() != spec.d) throw DimensionError("mbajd_phi: dimension mismatch");
  if (t == 0.0) return 0.0;
  Complex phi = mbajd_log_det_term(spec, u, t);
  if (!spec.m.empty()) {
    auto rate = [&](double s) -> Complex {
      if (s == 0.0) return jump_rate(spec.m, u);
      return jump_rate(spec.m, psi_from_sigma(spec.beta, u, sigma_block_exp(spec.beta, spec.alpha, s), s));
    };
    const double scale = std::max(1.0, spec.m.total_mass() * t);
    phi += adaptive_simpson<Complex>(rate, 0.0, t, 1e-13 * scale);
  }
  return phi;
}

Complex mbajd_transform(const MBAJDSpec& spec, const CSymMatrix& u, const SymMatrix& x, double t) {
  if (!is_psd(x)) throw DomainError("mbajd_transform: x must be positive semidefinite");
  if (t == 0.0) return std::exp(-trace_inner(u, x));
  return std::exp(-mbajd_phi(spec, u, t) - trace_inner(mbajd_psi(spec, u, t), x));
}

Complex wishart_transform(const MBAJDSpec& spec, const CSymMatrix& u, const SymMatrix& x, double t) {
  if (!spec.m.empty()) throw DomainError("wishart_transform: jump measure must be empty");
  return mbajd_transform(spec, u, x, t);
}

}  // namespace psdaffine
