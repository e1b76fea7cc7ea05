#include "psdaffine/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace psdaffine {

// ---------------------------------------------------------------------------
// LinearDrift

LinearDrift::LinearDrift(LyapunovDrift l) : d_(static_cast<int>(l.beta.rows())) {
  if (l.beta.rows() != l.beta.cols()) throw DimensionError("Lyapunov drift: beta must be square");
  rep_ = std::move(l);
}

LinearDrift::LinearDrift(GeneralDrift g) {
  const auto n = g.matrix.rows();
  if (n != g.matrix.cols()) throw DimensionError("general drift: matrix must be square");
  // n = d(d+1)/2
  const int d = static_cast<int>(std::lround((std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0));
  if (vec_dim(d) != n || d < 1) throw DimensionError("general drift: matrix size is not d(d+1)/2");
  d_ = d;
  rep_ = std::move(g);
}

MatrixXd LinearDrift::vectorized() const {
  if (const auto* g = as_general()) return g->matrix;
  const int n = vec_dim(d_);
  MatrixXd out(n, n);
  VectorXd e = VectorXd::Zero(n);
  for (int k = 0; k < n; ++k) {
    e.setZero();
    e(k) = 1.0;
    out.col(k) = vec_sym(apply_drift(*this, unvec_sym(e, d_)));
  }
  return out;
}

LinearDrift LinearDrift::to_general() const { return general(vectorized()); }

SymMatrix apply_drift(const LinearDrift& B, const SymMatrix& x) {
  if (B.dim() != x.dim()) throw DimensionError("apply_drift: dimension mismatch");
  if (const auto* l = B.as_lyapunov()) {
    const MatrixXd bx = l->beta * x.mat();
    return SymMatrix::symmetrize(bx + bx.transpose());
  }
  return unvec_sym(B.as_general()->matrix * vec_sym(x), x.dim());
}

SymMatrix apply_drift_adjoint(const LinearDrift& B, const SymMatrix& u) {
  if (B.dim() != u.dim()) throw DimensionError("apply_drift_adjoint: dimension mismatch");
  if (const auto* l = B.as_lyapunov()) {
    const MatrixXd ub = u.mat() * l->beta;
    return SymMatrix::symmetrize(ub + ub.transpose());
  }
  return unvec_sym(B.as_general()->matrix.transpose() * vec_sym(u), u.dim());
}

CSymMatrix apply_drift_adjoint(const LinearDrift& B, const CSymMatrix& u) {
  return CSymMatrix(apply_drift_adjoint(B, u.re()), apply_drift_adjoint(B, u.im()));
}

double AtomicMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

// ---------------------------------------------------------------------------
// Classification and construction

const char* to_string(AlphaClass c) {
  switch (c) {
    case AlphaClass::Zero: return "zero";
    case AlphaClass::Invertible: return "invertible";
    case AlphaClass::DegenerateNonzero: return "degenerate_nonzero";
  }
  return "?";
}

AlphaClass classify_alpha(const SymMatrix& alpha, double tol) {
  const Spectrum s = eigen_sym(alpha);
  const double thr = tol * std::max(1.0, alpha.norm());
  const double lo = s.eigenvalues.minCoeff();
  const double hi = s.eigenvalues.cwiseAbs().maxCoeff();
  if (hi <= thr) return AlphaClass::Zero;
  if (lo > thr) return AlphaClass::Invertible;
  return AlphaClass::DegenerateNonzero;
}

AffineParams AffineParams::zero(int d) {
  AffineParams p;
  p.d = d;
  p.alpha = SymMatrix(d);
  p.b = SymMatrix(d);
  p.B = LinearDrift::zero(d);
  p.gamma = SymMatrix(d);
  return p;
}

// ---------------------------------------------------------------------------
// Truncation

SymMatrix truncation_chi(const SymMatrix& xi) {
  const double n = xi.norm();
  return n <= 1.0 ? xi : xi * (1.0 / n);
}

namespace {

MatrixXd truncation_correction(const MatrixAtomicMeasure& mu, int d) {
  MatrixXd corr = MatrixXd::Zero(vec_dim(d), vec_dim(d));
  for (const auto& a : mu.atoms) corr += vec_sym(truncation_chi(a.xi)) * vec_sym(a.weightMatrix).transpose();
  return corr;
}

}  // namespace

AffineParams detruncate(const TruncatedParams& tp) {
  AffineParams p;
  p.d = tp.d;
  p.alpha = tp.alpha;
  p.b = tp.b;
  p.c = tp.c;
  p.gamma = tp.gamma;
  p.m = tp.m;
  p.mu = tp.mu;
  if (tp.mu.empty())
    p.B = tp.Btilde;
  else
    p.B = LinearDrift::general(tp.Btilde.vectorized() - truncation_correction(tp.mu, tp.d));
  return p;
}

TruncatedParams retruncate(const AffineParams& p) {
  TruncatedParams tp;
  tp.d = p.d;
  tp.alpha = p.alpha;
  tp.b = p.b;
  tp.c = p.c;
  tp.gamma = p.gamma;
  tp.m = p.m;
  tp.mu = p.mu;
  if (p.mu.empty())
    tp.Btilde = p.B;
  else
    tp.Btilde = LinearDrift::general(p.B.vectorized() + truncation_correction(p.mu, p.d));
  return tp;
}

// ---------------------------------------------------------------------------
// Admissibility

InwardResult inward_pointing_check(const LinearDrift& B, const std::vector<BoundaryPair>& pairs, double tol) {
  InwardResult r;
  r.worstValue = std::numeric_limits<double>::infinity();
  for (const auto& pr : pairs) {
    const double comp = trace_inner(pr.x, pr.u);
    if (std::abs(comp) > 1e-8) {
      std::ostringstream os;
      os << "inward_pointing_check: pair " << pr.label << " is not complementary (<x,u> = " << comp << ")";
      throw DomainError(os.str());
    }
    const double v = trace_inner(apply_drift(B, pr.x), pr.u);
    if (v < r.worstValue) {
      r.worstValue = v;
      r.worstPair = pr;
    }
    ++r.pairsChecked;
  }
  if (pairs.empty()) r.worstValue = 0.0;
  r.pass = r.worstValue >= -tol;
  return r;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate(const AffineParams& params, int nRandomPairs, double tol, std::uint64_t seed) {
  ValidationReport rep;
  const int d = params.d;
  auto add = [&rep](std::string name, double value, double threshold, std::string detail) {
    rep.checks.push_back({std::move(name), value >= threshold, value, threshold, std::move(detail)});
  };
  auto psd_slack = [tol](const SymMatrix& x) { return -tol * std::max(1.0, x.norm()); };

  add("dimension", d, 2, "d >= 2");
  const bool dimsOk = params.alpha.dim() == d && params.b.dim() == d && params.gamma.dim() == d &&
                      params.B.dim() == d;
  add("dimensions_consistent", dimsOk ? 1.0 : 0.0, 1.0, "alpha, b, gamma, drift all d x d");
  if (!dimsOk || d < 2) return rep;

  add("alpha_psd", lambda_min(params.alpha), psd_slack(params.alpha), "lambda_min(alpha) >= 0");
  const SymMatrix dom = params.b - params.alpha * static_cast<double>(d - 1);
  add("drift_dominance", lambda_min(dom), psd_slack(dom), "lambda_min(b - (d-1) alpha) >= 0, i.e. b >= (d-1) alpha");
  add("killing_rate", params.c, 0.0, "c >= 0");
  add("gamma_psd", lambda_min(params.gamma), psd_slack(params.gamma), "lambda_min(gamma) >= 0");

  {
    double worst = std::numeric_limits<double>::infinity();
    std::string detail = "every m atom: xi PSD and nonzero, weight > 0";
    bool ok = true;
    for (std::size_t k = 0; k < params.m.atoms.size(); ++k) {
      const auto& a = params.m.atoms[k];
      const bool good = a.xi.dim() == d && is_psd(a.xi, tol) && a.xi.norm() > 0.0 && a.weight > 0.0;
      if (a.xi.dim() == d) worst = std::min(worst, lambda_min(a.xi));
      if (!good && ok) {
        ok = false;
        detail += "; first violation at atom " + std::to_string(k);
      }
    }
    rep.checks.push_back({"m_atoms", ok, params.m.empty() ? 0.0 : worst, 0.0, detail});
  }
  {
    double worst = std::numeric_limits<double>::infinity();
    std::string detail = "every mu atom: xi PSD and nonzero, weight matrix PSD";
    bool ok = true;
    for (std::size_t k = 0; k < params.mu.atoms.size(); ++k) {
      const auto& a = params.mu.atoms[k];
      const bool shapes = a.xi.dim() == d && a.weightMatrix.dim() == d;
      const bool good = shapes && is_psd(a.xi, tol) && a.xi.norm() > 0.0 && is_psd(a.weightMatrix, tol);
      if (shapes) worst = std::min({worst, lambda_min(a.xi), lambda_min(a.weightMatrix)});
      if (!good && ok) {
        ok = false;
        detail += "; first violation at atom " + std::to_string(k);
      }
    }
    rep.checks.push_back({"mu_atoms", ok, params.mu.empty() ? 0.0 : worst, 0.0, detail});
  }

  const auto pairs = boundary_pairs(d, nRandomPairs, seed);
  const InwardResult inward = inward_pointing_check(params.B, pairs, tol);
  rep.pairsChecked = inward.pairsChecked;
  {
    std::ostringstream os;
    os << "min <B(x),u> over " << inward.pairsChecked << " complementary pairs";
    if (inward.worstPair) os << "; worst pair " << inward.worstPair->label;
    add("inward_pointing", inward.worstValue, -tol, os.str());
  }

  rep.alphaClass = classify_alpha(params.alpha, tol);
  add("alpha_class", 1.0, 1.0, to_string(rep.alphaClass));
  if (rep.alphaClass == AlphaClass::DegenerateNonzero)
    rep.warnings.emplace_back(
        "alpha is nonzero and singular: transform computations are outside the proved regime "
        "(alpha must be invertible or zero)");
  return rep;
}

// ---------------------------------------------------------------------------
// Jump integrals

namespace {

void require_re_psd(const CSymMatrix& u, const char* what) {
  if (!is_psd(u.re())) throw DomainError(std::string(what) + ": Re(u) must be positive semidefinite");
}

}  // namespace

Complex jump_sum_m(const AtomicMeasure& m, const CSymMatrix& u) {
  Complex s = 0.0;
  for (const auto& a : m.atoms) s += a.weight * (std::exp(-trace_inner(u, a.xi)) - 1.0);
  return s;
}

CSymMatrix jump_sum_mu(const MatrixAtomicMeasure& mu, const CSymMatrix& u) {
  CSymMatrix s(u.dim());
  for (const auto& a : mu.atoms) s += (std::exp(-trace_inner(u, a.xi)) - 1.0) * CSymMatrix(a.weightMatrix);
  return s;
}

Complex jump_transform_m(const AtomicMeasure& m, const CSymMatrix& u) {
  require_re_psd(u, "jump_transform_m");
  return jump_sum_m(m, u);
}

CSymMatrix jump_transform_mu(const MatrixAtomicMeasure& mu, const CSymMatrix& u) {
  require_re_psd(u, "jump_transform_mu");
  return jump_sum_mu(mu, u);
}

// ---------------------------------------------------------------------------
// Growth bound

double operator_norm(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  const SymMatrix ata = SymMatrix::symmetrize(a.transpose() * a);
  return std::sqrt(std::max(0.0, eigen_sym(ata).eigenvalues.maxCoeff()));
}

GrowthConstant growth_constant(const AffineParams& params) {
  GrowthConstant g{};
  g.driftNorm = operator_norm(params.B.vectorized().transpose());
  for (const auto& a : params.mu.atoms) {
    const double n = a.xi.norm();
    const double tr = a.weightMatrix.trace();
    g.c1 += std::min(n, 1.0) * tr;
    if (n > 1.0) g.c2 += 2.0 * tr;
  }
  g.gammaNorm = params.gamma.norm();
  g.value = g.driftNorm + g.c1 + 0.5 * (g.gammaNorm + g.c2);
  return g;
}

}  // namespace psdaffine
