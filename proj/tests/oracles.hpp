// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerical kernels except for data types.
#ifndef PSDAFFINE_TESTS_ORACLES_HPP
#define PSDAFFINE_TESTS_ORACLES_HPP

#include "psdaffine/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace psdaffine::testing {

inline SymMatrix random_sym(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n;
  SymMatrix s(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) s.set(i, j, scale * n(rng));
  return s;
}

/// G G^T with G d x rank Gaussian.
inline SymMatrix random_psd(int d, std::mt19937_64& rng, int rank = -1, double scale = 1.0) {
  if (rank < 0) rank = d;
  std::normal_distribution<double> n;
  MatrixXd g(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = n(rng);
  return SymMatrix::symmetrize(scale * g * g.transpose() / std::max(1, rank));
}

/// Positive definite with spectrum in [lo, hi].
inline SymMatrix random_pd(int d, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const MatrixXd q = random_orthogonal(d, rng);
  VectorXd lam(d);
  for (int i = 0; i < d; ++i) lam(i) = u(rng);
  return SymMatrix::symmetrize(q * lam.asDiagonal() * q.transpose());
}

template <class M>
typename M::Scalar element_sum_inner(const M& x, const M& y) {
  typename M::Scalar s = 0;
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) s += x(i, j) * y(i, j);
  return s;
}

inline double lambda_max(const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(x.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline double lambda_min_ref(const MatrixXd& x) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (x + x.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Nearest PSD matrix by gradient descent on ||L L^T - x||^2 over the factor
/// L; needs no eigensolver.
inline MatrixXd projected_gradient_psd(const MatrixXd& x) {
  const auto d = x.rows();
  MatrixXd l = MatrixXd::Identity(d, d) * std::sqrt(std::max(1.0, x.norm()));
  const double lr = 0.1 / std::max(1.0, x.norm());
  for (int it = 0; it < 200000; ++it) {
    const MatrixXd r = l * l.transpose() - x;
    const MatrixXd g = 2.0 * r * l;
    l -= lr * g;
    if (g.norm() < 1e-12) break;
  }
  return l * l.transpose();
}

/// Taylor series with scaling and squaring.
inline MatrixXd taylor_expm(const MatrixXd& a) {
  int s = 0;
  double nrm = a.norm();
  while (nrm > 0.5) {
    nrm /= 2;
    ++s;
  }
  const MatrixXd b = a / std::pow(2.0, s);
  MatrixXd term = MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * b / k;
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

/// Largest singular value by power iteration on A^T A.
inline double power_iteration_norm(const MatrixXd& a, int iters = 5000) {
  VectorXd v = VectorXd::Ones(a.cols()) + VectorXd::LinSpaced(a.cols(), 0.0, 0.37);
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    const VectorXd w = a.transpose() * (a * v);
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    v = w / n;
    est = std::sqrt(n);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Riccati right-hand side written directly from the formulas with dense
// complex matrices, plus a fixed-step RK4 integrator.

struct RiccatiRef {
  Complex phi;
  MatrixXcd psi;
};

inline MatrixXcd ref_drift_adjoint(const AffineParams& p, const MatrixXcd& u) {
  if (const auto* l = p.B.as_lyapunov()) return l->beta.transpose() * u + u * l->beta;
  // <B(x), u> = <x, B^T(u)>: apply the transpose of the vectorized matrix to
  // the real and imaginary parts separately, coordinates by hand.
  const int d = p.d;
  const MatrixXd g = p.B.as_general()->matrix;
  auto vec = [&](const MatrixXd& x) {
    VectorXd v(d * (d + 1) / 2);
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) v(k++) = i == j ? x(i, i) : std::sqrt(2.0) * x(i, j);
    return v;
  };
  auto unvec = [&](const VectorXd& v) {
    MatrixXd x(d, d);
    int k = 0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j, ++k) x(i, j) = x(j, i) = i == j ? v(k) : v(k) / std::sqrt(2.0);
    return x;
  };
  const MatrixXd re = unvec(g.transpose() * vec(u.real()));
  const MatrixXd im = unvec(g.transpose() * vec(u.imag()));
  return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
}

inline RiccatiRef ref_rhs(const AffineParams& p, const MatrixXcd& u) {
  const MatrixXcd alpha = p.alpha.mat().cast<Complex>();
  MatrixXcd dpsi = -2.0 * u * alpha * u + ref_drift_adjoint(p, u) + p.gamma.mat().cast<Complex>();
  Complex dphi = element_sum_inner<MatrixXcd>(p.b.mat().cast<Complex>(), u) + p.c;
  for (const auto& a : p.mu.atoms) {
    const Complex e = std::exp(-element_sum_inner<MatrixXcd>(a.xi.mat().cast<Complex>(), u)) - 1.0;
    dpsi -= e * a.weightMatrix.mat().cast<Complex>();
  }
  for (const auto& a : p.m.atoms)
    dphi -= a.weight * (std::exp(-element_sum_inner<MatrixXcd>(a.xi.mat().cast<Complex>(), u)) - 1.0);
  return {dphi, dpsi};
}

/// Fixed-step RK4 from (0, u0) to T.
inline RiccatiRef rk4_reference(const AffineParams& p, const MatrixXcd& u0, double T, double h) {
  const long n = std::max(1L, static_cast<long>(std::ceil(T / h)));
  const double dt = T / n;
  RiccatiRef y{0.0, u0};
  for (long k = 0; k < n; ++k) {
    const RiccatiRef k1 = ref_rhs(p, y.psi);
    const RiccatiRef k2 = ref_rhs(p, y.psi + 0.5 * dt * k1.psi);
    const RiccatiRef k3 = ref_rhs(p, y.psi + 0.5 * dt * k2.psi);
    const RiccatiRef k4 = ref_rhs(p, y.psi + dt * k3.psi);
    y.phi += dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    y.psi += dt / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
  }
  return y;
}

/// d/dt f at 0 from forward differences D(h) = (f(h) - f0) / h with h halving,
/// Richardson-eliminating the powers h, h^2, ... in turn.
template <class F>
Complex forward_derivative(F&& f, Complex f0, double h0, int levels = 8) {
  std::vector<std::vector<Complex>> R(levels);
  Complex best = 0.0;
  double bestErr = std::numeric_limits<double>::infinity();
  for (int i = 0; i < levels; ++i) {
    const double h = std::ldexp(h0, -i);
    R[i].push_back((f(h) - f0) / h);
    for (int k = 1; k <= i; ++k) {
      const double fac = std::ldexp(1.0, k) - 1.0;
      R[i].push_back(R[i][k - 1] + (R[i][k - 1] - R[i - 1][k - 1]) / fac);
      const double e = std::max(std::abs(R[i][k] - R[i][k - 1]), std::abs(R[i][k] - R[i - 1][k - 1]));
      if (e < bestErr) {
        bestErr = e;
        best = R[i][k];
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random admissible parameter sets.

struct RandomModelOptions {
  int d = 2;
  bool alphaZero = false;
  bool generalDrift = false;
  int mAtoms = 1;
  int muAtoms = 1;
  bool bigJumps = false;  // some mu atoms outside the unit ball
  bool killing = false;
};

/// Lyapunov drift beta x + x beta^T is inward pointing for every beta; the
/// general drift is a Lyapunov drift plus a map x -> sum_k <x, a_k> c_k with
/// PSD a_k, c_k (nonnegative on complementary pairs). Jump atoms are PSD.
inline AffineParams random_admissible(std::mt19937_64& rng, const RandomModelOptions& o) {
  const int d = o.d;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  AffineParams p = AffineParams::zero(d);
  p.alpha = o.alphaZero ? SymMatrix::zero(d) : random_pd(d, rng, 0.2, 1.5);
  // b - (d - 1) alpha PSD.
  p.b = p.alpha * (d - 1 + u(rng)) + random_psd(d, rng, d, 0.5);
  MatrixXd beta(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) beta(i, j) = 0.4 * n(rng);
  beta -= 0.5 * MatrixXd::Identity(d, d);
  if (o.generalDrift) {
    MatrixXd g = LinearDrift::lyapunov(beta).vectorized();
    for (int k = 0; k < 2; ++k) {
      const VectorXd a = vec_sym(random_psd(d, rng, 1, 0.5));
      const VectorXd c = vec_sym(random_psd(d, rng, 1, 0.5));
      g += c * a.transpose();
    }
    p.B = LinearDrift::general(g);
  } else {
    p.B = LinearDrift::lyapunov(beta);
  }
  for (int k = 0; k < o.mAtoms; ++k) p.m.atoms.push_back({random_psd(d, rng, 1 + k % d, 0.4), 0.2 + u(rng)});
  for (int k = 0; k < o.muAtoms; ++k) {
    const double scale = (o.bigJumps && k % 2 == 1) ? 3.0 : 0.3;
    p.mu.atoms.push_back({random_psd(d, rng, 1 + k % d, scale), random_psd(d, rng, d, 0.3)});
  }
  if (o.killing) {
    p.c = u(rng);
    p.gamma = random_psd(d, rng, d, 0.2);
  }
  return p;
}

/// u with Re u positive definite and arbitrary imaginary part.
inline CSymMatrix random_interior_u(int d, std::mt19937_64& rng, double imScale = 1.0) {
  return CSymMatrix(random_pd(d, rng, 0.1, 2.0), random_sym(d, rng, imScale));
}

}  // namespace psdaffine::testing

#endif  // PSDAFFINE_TESTS_ORACLES_HPP
