#include "psdaffine/riccati.hpp"

#include "dormand_prince.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace psdaffine {

// ---------------------------------------------------------------------------
// Right-hand sides

RiccatiRHS::RiccatiRHS(const AffineParams& params, bool projected)
    : params_(params), drift_(params.B), projected_(projected), d_(params.d) {
  alpha_ = params.alpha.mat().cast<Complex>();
}

RiccatiRHS::RiccatiRHS(const TruncatedParams& params, bool projected)
    : params_(detruncate(params)), drift_(params.Btilde), projected_(projected), d_(params.d) {
  alpha_ = params.alpha.mat().cast<Complex>();
  for (const auto& a : params.mu.atoms) compensators_.push_back(truncation_chi(a.xi));
}

CSymMatrix RiccatiRHS::exponent_argument(const CSymMatrix& u) const {
  if (!projected_) return u;
  return CSymMatrix(psd_project(u.re()), u.im());
}

CSymMatrix RiccatiRHS::psi(const CSymMatrix& u) const {
  const MatrixXcd um = u.mat();
  // u alpha u is symmetric for symmetric u and alpha; symmetrize() only
  // removes rounding noise in the lower triangle.
  CSymMatrix r = CSymMatrix::symmetrize(-2.0 * (um * alpha_ * um));
  r += apply_drift_adjoint(drift_, u);
  r += CSymMatrix(params_.gamma);
  const auto& mu = params_.mu;
  if (!mu.empty()) {
    r -= jump_sum_mu(mu, exponent_argument(u));
    for (std::size_t k = 0; k < compensators_.size(); ++k)
      r -= trace_inner(u, compensators_[k]) * CSymMatrix(mu.atoms[k].weightMatrix);
  }
  return r;
}

Complex RiccatiRHS::phi(const CSymMatrix& u) const {
  Complex f = trace_inner(u, params_.b) + params_.c;
  if (!params_.m.empty()) f -= jump_sum_m(params_.m, exponent_argument(u));
  return f;
}

CSymMatrix rhs_psi(const AffineParams& params, const CSymMatrix& u, bool projected) {
  if (!projected && !is_psd(u.re())) throw DomainError("rhs_psi: Re(u) must be positive semidefinite");
  return RiccatiRHS(params, projected).psi(u);
}

Complex rhs_phi(const AffineParams& params, const CSymMatrix& u, bool projected) {
  if (!projected && !is_psd(u.re())) throw DomainError("rhs_phi: Re(u) must be positive semidefinite");
  return RiccatiRHS(params, projected).phi(u);
}

// ---------------------------------------------------------------------------
// State packing: [upper(Re psi), upper(Im psi), Re phi, Im phi]

namespace {

int state_dim(int d) { return 2 * vec_dim(d) + 2; }

VectorXd pack(const CSymMatrix& psi, Complex phi) {
  const int d = psi.dim();
  const int nv = vec_dim(d);
  VectorXd y(state_dim(d));
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) {
      y(k) = psi.re()(i, j);
      y(nv + k) = psi.im()(i, j);
    }
  y(2 * nv) = phi.real();
  y(2 * nv + 1) = phi.imag();
  return y;
}

CSymMatrix unpack_psi(const VectorXd& y, int d) {
  const int nv = vec_dim(d);
  SymMatrix re(d), im(d);
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) {
      re.set(i, j, y(k));
      im.set(i, j, y(nv + k));
    }
  return CSymMatrix(std::move(re), std::move(im));
}

Complex unpack_phi(const VectorXd& y, int d) {
  const int nv = vec_dim(d);
  return {y(2 * nv), y(2 * nv + 1)};
}

}  // namespace

void SolverConfig::check() const {
  if (!(relTol > 0.0) || !(absTol > 0.0)) throw DomainError("SolverConfig: tolerances must be positive");
  if (!(maxStep > 0.0)) throw DomainError("SolverConfig: maxStep must be positive");
  if (!(blowupNorm > 1.0)) throw DomainError("SolverConfig: blowupNorm must exceed 1");
  if (maxSteps < 1) throw DomainError("SolverConfig: maxSteps must be positive");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Ok: return "ok";
    case SolveStatus::BlowUp: return "blow_up";
    case SolveStatus::StepUnderflow: return "step_underflow";
    case SolveStatus::MaxSteps: return "max_steps";
  }
  return "?";
}

VectorXd RiccatiSolution::state_at(double t) const {
  if (times.empty()) throw DomainError("RiccatiSolution: empty solution");
  if (t < 0.0 || t > times.back() * (1.0 + 1e-14) + 1e-300)
    throw DomainError("RiccatiSolution: time outside the integrated interval");
  if (segments.empty() || t == 0.0) return pack(psi.front(), phi.front());
  auto it = std::upper_bound(segments.begin(), segments.end(), t,
                             [](double v, const Segment& s) { return v < s.t0; });
  const Segment& s = *std::prev(it);
  detail::DopriDense dense{s.t0, s.h, s.r1, s.r2, s.r3, s.r4, s.r5};
  return detail::dopri_dense_eval(dense, std::min(t, s.t0 + s.h));
}

Complex RiccatiSolution::phi_at(double t) const { return unpack_phi(state_at(t), d); }
CSymMatrix RiccatiSolution::psi_at(double t) const { return unpack_psi(state_at(t), d); }

bool is_interior(const CSymMatrix& u) {
  return lambda_min(u.re()) > kPsdTol * std::max(1.0, u.re().norm());
}

// ---------------------------------------------------------------------------
// Solver

RiccatiSolution solve(const RiccatiRHS& rhs, const CSymMatrix& u0, double T, const SolverConfig& cfg,
                      std::span<const double> checkpoints) {
  cfg.check();
  const int d = rhs.dim();
  if (u0.dim() != d) throw DimensionError("solve: u0 dimension does not match the parameters");
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("solve: T must be finite and nonnegative");
  if (!rhs.projected() && !is_psd(u0.re()))
    throw DomainError("solve: Re(u0) must be positive semidefinite");

  const AffineParams& params = rhs.params();
  const AlphaClass alphaClass = params.alpha_class();

  RiccatiSolution sol;
  sol.d = d;
  sol.times.push_back(0.0);
  sol.phi.emplace_back(0.0);
  sol.psi.push_back(u0);

  auto& diag = sol.diagnostics;
  diag.growthConstant = growth_constant(params).value;
  const double u0Scale = std::sqrt(1.0 + u0.norm() * u0.norm());
  diag.boundaryMonitored = is_interior(u0) && alphaClass != AlphaClass::DegenerateNonzero;
  if (alphaClass == AlphaClass::DegenerateNonzero)
    diag.warnings.emplace_back(
        "alpha is nonzero and singular: global existence is conjectured, not proved; monitoring "
        "Re tr(conj(psi) psi alpha psi) >= 0");

  auto observe = [&](double t, const CSymMatrix& psi) {
    const double nrm = psi.norm();
    diag.maxPsiNorm = std::max(diag.maxPsiNorm, nrm);
    diag.maxGrowthRatio = std::max(diag.maxGrowthRatio, nrm / (std::exp(diag.growthConstant * t) * u0Scale));
    const double lm = lambda_min(psi.re());
    diag.minLambdaRe = std::min(diag.minLambdaRe, lm);
    if (diag.boundaryMonitored && lm <= cfg.boundaryFloor) diag.boundaryViolated = true;
    if (alphaClass == AlphaClass::DegenerateNonzero) {
      const double q = riccati_quadratic_real(psi, params.alpha);
      diag.minQuadraticMonitor = std::min(diag.minQuadraticMonitor, q);
      if (q < -1e-12 * std::max(1.0, nrm * nrm * nrm)) diag.outsideProvedRegime = true;
    }
  };
  observe(0.0, u0);

  auto f = [&rhs, d](double, const VectorXd& y) -> VectorXd {
    const CSymMatrix psi = unpack_psi(y, d);
    return pack(rhs.psi(psi), rhs.phi(psi));
  };

  bool blewUp = false;
  auto onStep = [&](const detail::DopriDense& dense, double t, const VectorXd& y) {
    const CSymMatrix psi = unpack_psi(y, d);
    const double nrm = psi.norm();
    if (!std::isfinite(nrm) || nrm > cfg.blowupNorm) {
      blewUp = true;
      return false;
    }
    sol.times.push_back(t);
    sol.phi.push_back(unpack_phi(y, d));
    sol.psi.push_back(psi);
    sol.segments.push_back({dense.t0, dense.h, dense.r1, dense.r2, dense.r3, dense.r4, dense.r5});
    observe(t, psi);
    return true;
  };

  std::vector<double> cps(checkpoints.begin(), checkpoints.end());
  std::sort(cps.begin(), cps.end());

  detail::DopriStats stats;
  const detail::DopriSettings settings{cfg.relTol, cfg.absTol, cfg.maxStep, cfg.initialStep, cfg.maxSteps};
  const detail::DopriStop stop = detail::dopri5(f, pack(u0, 0.0), T, settings, cps, onStep, stats);
  diag.accepted = stats.accepted;
  diag.rejected = stats.rejected;
  switch (stop) {
    case detail::DopriStop::Done: break;
    case detail::DopriStop::Aborted:
      diag.status = blewUp ? SolveStatus::BlowUp : SolveStatus::Ok;
      break;
    case detail::DopriStop::StepUnderflow: diag.status = SolveStatus::StepUnderflow; break;
    case detail::DopriStop::MaxSteps: diag.status = SolveStatus::MaxSteps; break;
  }
  if (diag.status != SolveStatus::Ok) {
    diag.tPlusEstimate = sol.times.back();
    // Underflow of the step controller is the other face of a blow-up.
    if (diag.status == SolveStatus::StepUnderflow) diag.warnings.emplace_back("step size underflow");
  }
  return sol;
}

RiccatiSolution solve(const AffineParams& params, const CSymMatrix& u0, double T, const SolverConfig& cfg,
                      std::span<const double> checkpoints) {
  return solve(RiccatiRHS(params, false), u0, T, cfg, checkpoints);
}

RiccatiSolution solve_boundary(const AffineParams& params, const CSymMatrix& u0, double T,
                               const SolverConfig& cfg, std::span<const double> checkpoints) {
  if (!is_psd(u0.re())) throw DomainError("solve_boundary: Re(u0) must be positive semidefinite");
  return solve(RiccatiRHS(params, true), u0, T, cfg, checkpoints);
}

// ---------------------------------------------------------------------------
// Boundary limit

namespace {

VectorXd flat(Complex phi, const CSymMatrix& psi) { return pack(psi, phi); }

}  // namespace

BoundaryLimit boundary_limit(const AffineParams& params, const CSymMatrix& u0, double T, int nMax,
                             const SolverConfig& cfg) {
  if (!is_psd(u0.re())) throw DomainError("boundary_limit: Re(u0) must be positive semidefinite");
  if (nMax < 2) throw DomainError("boundary_limit: nMax must be at least 2");
  const int d = params.d;

  BoundaryLimit out;
  std::vector<VectorXd> values;
  double maxMod = 0.0;
  const SymMatrix ident = SymMatrix::identity(d);
  for (int n = 1; n <= nMax; n *= 2) {
    const CSymMatrix un = u0 + CSymMatrix(ident * (1.0 / n));
    RiccatiSolution s = solve(params, un, T, cfg);
    if (!s.ok()) {
      std::ostringstream os;
      os << "boundary_limit: solve for n = " << n << " stopped early (" << to_string(s.diagnostics.status) << ')';
      throw SolverError(os.str(), s.diagnostics.status, s.diagnostics.tPlusEstimate);
    }
    const double tail = out.table.empty() ? std::nan("") : (s.psi_final() - out.table.back().psi).norm();
    out.table.push_back({n, s.phi_final(), s.psi_final(), tail});
    values.push_back(flat(s.phi_final(), s.psi_final()));
    maxMod = std::max(maxMod, std::abs(std::exp(-s.phi_final() - s.psi_final().trace())));
  }
  out.maxModulus = maxMod;

  out.tailsDecreasing = true;
  for (std::size_t i = 2; i < out.table.size(); ++i)
    if (!(out.table[i].tail < out.table[i - 1].tail)) out.tailsDecreasing = false;

  // Richardson table in h = 1/n with h halving between levels.
  const std::size_t L = values.size();
  std::vector<std::vector<VectorXd>> R(L);
  for (std::size_t i = 0; i < L; ++i) {
    R[i].push_back(values[i]);
    for (std::size_t k = 1; k <= i; ++k) {
      const double f = std::ldexp(1.0, static_cast<int>(k)) - 1.0;
      R[i].push_back(R[i][k - 1] + (R[i][k - 1] - R[i - 1][k - 1]) / f);
    }
  }
  // Coarse levels can sit outside the analyticity radius in 1/n, so the full
  // diagonal is not trusted; take the entry whose neighbours agree best.
  std::size_t bi = L - 1, bk = 0;
  double bestErr = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < L; ++i)
    for (std::size_t k = 1; k <= i; ++k) {
      const double e = std::max((R[i][k] - R[i][k - 1]).norm(), (R[i][k] - R[i - 1][k - 1]).norm());
      if (e < bestErr) {
        bestErr = e;
        bi = i;
        bk = k;
      }
    }
  const VectorXd& best = R[bi][bk];
  out.extrapolationError = bestErr;
  out.converged = out.tailsDecreasing && best.allFinite();

  RiccatiSolution& lim = out.solution;
  lim.d = d;
  lim.times = {0.0, T};
  lim.phi = {Complex(0.0), unpack_phi(best, d)};
  lim.psi = {u0, unpack_psi(best, d)};
  if (!out.converged) {
    lim.diagnostics.warnings.emplace_back("boundary_limit: tails did not decrease; no limit claimed");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transforms

Complex transform(const AffineParams& params, const CSymMatrix& u0, const SymMatrix& x, double T,
                  const SolverConfig& cfg) {
  if (!is_psd(x)) throw DomainError("transform: x must be positive semidefinite");
  if (!is_psd(u0.re())) throw DomainError("transform: Re(u0) must be positive semidefinite");
  if (T == 0.0) return std::exp(-trace_inner(u0, x));
  const RiccatiSolution s = is_interior(u0) ? solve(params, u0, T, cfg) : solve_boundary(params, u0, T, cfg);
  if (!s.ok()) {
    std::ostringstream os;
    os << "transform: integration stopped at t = " << s.diagnostics.tPlusEstimate << " ("
       << to_string(s.diagnostics.status) << ')';
    throw SolverError(os.str(), s.diagnostics.status, s.diagnostics.tPlusEstimate);
  }
  return std::exp(-s.phi_final() - trace_inner(s.psi_final(), x));
}

Complex characteristic_function(const AffineParams& params, const SymMatrix& w, const SymMatrix& x, double T,
                                const SolverConfig& cfg) {
  if (!is_psd(x)) throw DomainError("characteristic_function: x must be positive semidefinite");
  const CSymMatrix u0 = CSymMatrix::imaginary(w);
  if (T == 0.0) return std::exp(-trace_inner(u0, x));
  const RiccatiSolution s = solve_boundary(params, u0, T, cfg);
  if (!s.ok())
    throw SolverError("characteristic_function: integration stopped early", s.diagnostics.status,
                      s.diagnostics.tPlusEstimate);
  return std::exp(-s.phi_final() - trace_inner(s.psi_final(), x));
}

Complex generator_exp(const AffineParams& params, const CSymMatrix& u, const SymMatrix& x) {
  if (!is_psd(x)) throw DomainError("generator_exp: x must be positive semidefinite");
  const Complex F = rhs_phi(params, u);
  const CSymMatrix R = rhs_psi(params, u);
  return (-F - trace_inner(R, x)) * std::exp(-trace_inner(u, x));
}

}  // namespace psdaffine
