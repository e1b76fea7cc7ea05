#include "psdaffine/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace psdaffine {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

void PathRng::reseed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  std::uint64_t st = seed;
  std::uint64_t h = splitmix64(st);
  st = h ^ index;
  h = splitmix64(st);
  st = h ^ (stream * 0xD1B54A32D192ED03ULL);
  engine_.seed(splitmix64(st));
  normal_.reset();
  exponential_.reset();
}

void SimConfig::check() const {
  if (nPaths < 1) throw DomainError("SimConfig: nPaths must be at least 1");
  if (!(dt > 0.0)) throw DomainError("SimConfig: dt must be positive");
  if (antithetic && nPaths % 2 != 0) throw DomainError("SimConfig: antithetic sampling needs an even path count");
}

int resolve_threads(const SimConfig& cfg) {
  if (cfg.execution == Execution::Serial) return 1;
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("PSDAFFINE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(v);
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

DiffusionFactor diffusion_factor(const SymMatrix& alpha) {
  const Spectrum s = eigen_sym(alpha);
  if (s.eigenvalues(0) < -kPsdTol * std::max(1.0, alpha.norm()))
    throw DomainError("diffusion_factor: alpha must be positive semidefinite");
  const VectorXd root = s.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return {root.asDiagonal() * s.eigenvectors.transpose()};
}

void JumpClock::reset(PathRng& rng) {
  elapsed_ = 0.0;
  next_ = rng.exponential();
}

int JumpClock::advance(double increment, PathRng& rng) {
  elapsed_ += increment;
  int n = 0;
  while (next_ <= elapsed_) {
    ++n;
    next_ += rng.exponential();
  }
  return n;
}

namespace {

/// Parameters laid out for the inner loop.
struct EulerModel {
  int d = 0;
  MatrixXd b;
  const MatrixXd* beta = nullptr;  // Lyapunov drift
  MatrixXd general;                // vectorized drift otherwise
  MatrixXd sigma;
  std::vector<MatrixXd> xi;  // m atoms then mu atoms
  std::vector<double> rate;  // m weights (mu entries unused)
  std::vector<MatrixXd> weight;  // mu weight matrices, indexed by atom - nM
  std::size_t nM = 0;

  explicit EulerModel(const AffineParams& p) : d(p.d), b(p.b.mat()), sigma(diffusion_factor(p.alpha).sigma) {
    if (!p.conservative())
      throw DomainError("simulation requires conservative parameters (c = 0 and gamma = 0)");
    if (const auto* l = p.B.as_lyapunov())
      beta = &l->beta;
    else
      general = p.B.vectorized();
    nM = p.m.atoms.size();
    for (const auto& a : p.m.atoms) {
      xi.push_back(a.xi.mat());
      rate.push_back(a.weight);
    }
    for (const auto& a : p.mu.atoms) {
      xi.push_back(a.xi.mat());
      rate.push_back(0.0);
      weight.push_back(a.weightMatrix.mat());
    }
  }

  std::size_t atoms() const { return xi.size(); }
  double intensity(std::size_t k, const MatrixXd& X) const {
    return k < nM ? rate[k] : X.cwiseProduct(weight[k - nM]).sum();
  }
};

/// Current state of one discretization level of one path.
struct LevelState {
  MatrixXd X;
  MatrixXd V;    // eigenvectors of X
  VectorXd lam;  // eigenvalues of X (nonnegative)
  MatrixXd accW;
  std::vector<double> clock;        // elapsed intensity per atom
  std::vector<std::size_t> cursor;  // next arrival index per atom
};

struct Workspace {
  MatrixXd sqrtX, t1, t2, Xn, A, dW;
  VectorXd vecX;
  std::vector<std::vector<double>> arrivals;  // shared unit-rate arrivals per atom
  std::vector<LevelState> levels;
  std::vector<int> counts;
  PathRng gauss;
  std::vector<PathRng> jumps;  // one stream per atom, so levels can draw in any order
  bool ready = false;

  void init(const EulerModel& m, int nLevels) {
    const int d = m.d;
    sqrtX.resize(d, d);
    t1.resize(d, d);
    t2.resize(d, d);
    Xn.resize(d, d);
    A.resize(d, d);
    dW.resize(d, d);
    vecX.resize(vec_dim(d));
    arrivals.assign(m.atoms(), {});
    levels.resize(nLevels);
    for (auto& l : levels) {
      l.X.resize(d, d);
      l.V.resize(d, d);
      l.lam.resize(d);
      l.accW.resize(d, d);
      l.clock.assign(m.atoms(), 0.0);
      l.cursor.assign(m.atoms(), 0);
    }
    counts.assign(m.atoms(), 0);
    jumps.resize(m.atoms());
    ready = true;
  }
};

/// Arrivals of atom k while level `s` advances its clock by `increment`.
int count_arrivals(std::vector<double>& arrivals, LevelState& s, std::size_t k, double increment, PathRng& rng) {
  s.clock[k] += increment;
  int n = 0;
  for (;;) {
    if (s.cursor[k] == arrivals.size()) arrivals.push_back((arrivals.empty() ? 0.0 : arrivals.back()) + rng.exponential());
    if (arrivals[s.cursor[k]] > s.clock[k]) break;
    ++s.cursor[k];
    ++n;
  }
  return n;
}

void apply_general_drift(const EulerModel& m, const MatrixXd& X, double dt, Workspace& ws) {
  const int d = m.d;
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) ws.vecX(k++) = (i == j) ? X(i, i) : std::sqrt(2.0) * X(i, j);
  k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) {
      const double v = dt * m.general.row(k).dot(ws.vecX);
      if (i == j) {
        ws.Xn(i, i) += v;
      } else {
        ws.Xn(i, j) += v / std::sqrt(2.0);
        ws.Xn(j, i) += v / std::sqrt(2.0);
      }
    }
}

/// Jacobi eigensolver on a column-major d x d array, same rotations as
/// jacobi_eigen; eigenvalues ascending. D > 0 fixes the size at compile time.
template <int D>
void small_eigen(double* a, double* w, double* v, int dRun) {
  const int d = D > 0 ? D : dRun;
  double scale = 0.0;
  for (int k = 0; k < d * d; ++k) {
    if (!std::isfinite(a[k])) throw DomainError("simulation: non-finite state");
    scale += a[k] * a[k];
    v[k] = 0.0;
  }
  scale = std::sqrt(scale);
  for (int k = 0; k < d; ++k) v[k + k * d] = 1.0;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 100 && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) off += a[p + q * d] * a[p + q * d];
    if (off == 0.0 || std::sqrt(2.0 * off) <= 1e-15 * scale) break;
    if (sweep == 99) throw DomainError("simulation: eigensolver did not converge");
    for (int p = 0; p < d; ++p)
      for (int q = p + 1; q < d; ++q) {
        const double apq = a[p + q * d];
        if (apq == 0.0) continue;
        const double app = a[p + p * d];
        const double aqq = a[q + q * d];
        if (sweep > 3 && std::abs(apq) < 100.0 * kEps * std::min(std::abs(app), std::abs(aqq))) {
          a[p + q * d] = a[q + p * d] = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < d; ++k) {
          const double akp = a[k + p * d], akq = a[k + q * d];
          a[k + p * d] = c * akp - sn * akq;
          a[k + q * d] = sn * akp + c * akq;
        }
        for (int k = 0; k < d; ++k) {
          const double apk = a[p + k * d], aqk = a[q + k * d];
          a[p + k * d] = c * apk - sn * aqk;
          a[q + k * d] = sn * apk + c * aqk;
        }
        a[p + q * d] = a[q + p * d] = 0.0;
        for (int k = 0; k < d; ++k) {
          const double vkp = v[k + p * d], vkq = v[k + q * d];
          v[k + p * d] = c * vkp - sn * vkq;
          v[k + q * d] = sn * vkp + c * vkq;
        }
      }
  }
  for (int i = 0; i < d; ++i) w[i] = a[i + i * d];
  for (int i = 1; i < d; ++i)
    for (int j = i; j > 0 && w[j - 1] > w[j]; --j) {
      std::swap(w[j - 1], w[j]);
      for (int k = 0; k < d; ++k) std::swap(v[k + (j - 1) * d], v[k + j * d]);
    }
}

/// X <- pi(X + (b + B(X)) dt + sqrt(X) dW Sigma + Sigma^T dW^T sqrt(X) + sum_k n_k xi_k).
/// Plain loops over raw storage; D > 0 fixes the dimension at compile time.
template <int D>
void euler_advance_impl(const EulerModel& m, LevelState& s, const MatrixXd& dW, double dt, const int* counts,
                        Workspace& ws) {
  const int d = D > 0 ? D : m.d;
  double* sq = ws.sqrtX.data();
  double* t1 = ws.t1.data();
  double* t2 = ws.t2.data();
  double* xn = ws.Xn.data();
  double* lam = s.lam.data();
  const double* x = s.X.data();
  const double* w = dW.data();
  const double* sg = m.sigma.data();
  const double* bb = m.b.data();

  // sqrt(X) from the eigendecomposition kept by the previous projection.
  {
    const double* v = s.V.data();
    for (int k = 0; k < d * d; ++k) sq[k] = 0.0;
    for (int k = 0; k < d; ++k) {
      if (!(lam[k] > 0.0)) continue;
      const double r = std::sqrt(lam[k]);
      const double* vk = v + k * d;
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) sq[i + j * d] += r * vk[i] * vk[j];
    }
  }

  for (int k = 0; k < d * d; ++k) xn[k] = x[k] + dt * bb[k];
  if (m.beta != nullptr) {
    const double* be = m.beta->data();
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int k = 0; k < d; ++k) acc += be[i + k * d] * x[k + j * d];
        t1[i + j * d] = acc;
      }
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) xn[i + j * d] += dt * (t1[i + j * d] + t1[j + i * d]);
  } else {
    apply_general_drift(m, s.X, dt, ws);
  }

  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k) acc += sq[i + k * d] * w[k + j * d];
      t1[i + j * d] = acc;
    }
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int k = 0; k < d; ++k) acc += t1[i + k * d] * sg[k + j * d];
      t2[i + j * d] = acc;
    }
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) xn[i + j * d] += t2[i + j * d] + t2[j + i * d];
  for (std::size_t k = 0; k < m.atoms(); ++k)
    if (counts[k] != 0) {
      const double n = static_cast<double>(counts[k]);
      const double* xi = m.xi[k].data();
      for (int e = 0; e < d * d; ++e) xn[e] += n * xi[e];
    }

  double* a = ws.A.data();
  for (int k = 0; k < d * d; ++k) a[k] = xn[k];
  small_eigen<D>(a, lam, s.V.data(), d);
  double* xo = s.X.data();
  if (lam[0] >= 0.0) {
    for (int k = 0; k < d * d; ++k) xo[k] = xn[k];
    return;
  }
  const double* v = s.V.data();
  for (int k = 0; k < d * d; ++k) xo[k] = 0.0;
  for (int k = 0; k < d; ++k) {
    if (!(lam[k] > 0.0)) {
      lam[k] = 0.0;
      continue;
    }
    const double* vk = v + k * d;
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) xo[i + j * d] += lam[k] * vk[i] * vk[j];
  }
}

void euler_advance(const EulerModel& m, LevelState& s, const MatrixXd& dW, double dt, const int* counts,
                   Workspace& ws) {
  switch (m.d) {
    case 1: return euler_advance_impl<1>(m, s, dW, dt, counts, ws);
    case 2: return euler_advance_impl<2>(m, s, dW, dt, counts, ws);
    case 3: return euler_advance_impl<3>(m, s, dW, dt, counts, ws);
    default: return euler_advance_impl<0>(m, s, dW, dt, counts, ws);
  }
}

void set_initial(LevelState& s, const MatrixXd& x0, const VectorXd& lam0, const MatrixXd& V0) {
  s.X = x0;
  s.lam = lam0;
  s.V = V0;
  s.accW.setZero();
  std::fill(s.clock.begin(), s.clock.end(), 0.0);
  std::fill(s.cursor.begin(), s.cursor.end(), std::size_t{0});
}

struct PathPlan {
  int levels;
  long fineSteps;
  double fineDt;
  std::uint64_t seed;
  bool antithetic;
  MatrixXd x0;
  VectorXd lam0;
  MatrixXd V0;
};

/// Simulates one path on all levels; `out` receives exp(-<u, X_T>) per
/// (level, u).
void simulate_path(const EulerModel& m, const PathPlan& plan, long path, std::span<const CSymMatrix> us,
                   Workspace& ws, Complex* out) {
  const int d = m.d;
  const bool mirrored = plan.antithetic && (path % 2 == 1);
  const auto gaussKey = static_cast<std::uint64_t>(plan.antithetic ? path / 2 : path);
  ws.gauss.reseed(plan.seed, gaussKey, 0);
  for (std::size_t k = 0; k < ws.jumps.size(); ++k) ws.jumps[k].reseed(plan.seed, static_cast<std::uint64_t>(path), 1 + k);
  for (auto& a : ws.arrivals) a.clear();
  for (auto& l : ws.levels) set_initial(l, plan.x0, plan.lam0, plan.V0);

  const double sqrtDt = std::sqrt(plan.fineDt);
  const double sign = mirrored ? -1.0 : 1.0;
  for (long step = 0; step < plan.fineSteps; ++step) {
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) ws.dW(i, j) = sign * sqrtDt * ws.gauss.normal();
    for (int lev = 0; lev < plan.levels; ++lev) {
      LevelState& s = ws.levels[lev];
      const long stride = 1L << lev;
      if (lev == 0) {
        s.accW = ws.dW;
      } else {
        s.accW += ws.dW;
        if ((step + 1) % stride != 0) continue;
      }
      const double dt = plan.fineDt * static_cast<double>(stride);
      for (std::size_t k = 0; k < m.atoms(); ++k)
        ws.counts[k] = count_arrivals(ws.arrivals[k], s, k, m.intensity(k, s.X) * dt, ws.jumps[k]);
      euler_advance(m, s, s.accW, dt, ws.counts.data(), ws);
      s.accW.setZero();
    }
  }

  const std::size_t nu = us.size();
  for (int lev = 0; lev < plan.levels; ++lev) {
    const MatrixXd& X = ws.levels[lev].X;
    for (std::size_t q = 0; q < nu; ++q) {
      const double re = X.cwiseProduct(us[q].re().mat()).sum();
      const double im = X.cwiseProduct(us[q].im().mat()).sum();
      out[lev * nu + q] = std::exp(-Complex(re, im));
    }
  }
}

template <class Body>
void for_each_path(long n, const SimConfig& cfg, Body&& body) {
  const int threads = resolve_threads(cfg);
  if (cfg.execution == Execution::Serial || threads <= 1) {
    Workspace ws;
    for (long i = 0; i < n; ++i) body(i, ws);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel num_threads(threads)
  {
    Workspace ws;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) body(i, ws);
  }
#else
  Workspace ws;
  for (long i = 0; i < n; ++i) body(i, ws);
#endif
}

/// Pairwise sum of f(i) over [lo, hi); the tree depends only on the index
/// range, never on the execution order.
template <class F>
double pairwise_sum(const F& f, long lo, long hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (long i = lo; i < hi; ++i) s += f(i);
    return s;
  }
  const long mid = lo + (hi - lo) / 2;
  return pairwise_sum(f, lo, mid) + pairwise_sum(f, mid, hi);
}

MCEstimate reduce(const std::vector<Complex>& values, long nPaths, std::size_t stride, std::size_t offset,
                  bool antithetic, double dt, long steps) {
  // Antithetic pairs are averaged first and treated as one sample.
  const long nSamples = antithetic ? nPaths / 2 : nPaths;
  auto sample = [&](long i) -> Complex {
    if (!antithetic) return values[static_cast<std::size_t>(i) * stride + offset];
    return 0.5 * (values[static_cast<std::size_t>(2 * i) * stride + offset] +
                  values[static_cast<std::size_t>(2 * i + 1) * stride + offset]);
  };
  const double n = static_cast<double>(nSamples);
  const double mre = pairwise_sum([&](long i) { return sample(i).real(); }, 0, nSamples) / n;
  const double mim = pairwise_sum([&](long i) { return sample(i).imag(); }, 0, nSamples) / n;
  MCEstimate est;
  est.mean = {mre, mim};
  est.nPaths = nPaths;
  est.dt = dt;
  est.steps = steps;
  if (nSamples > 1) {
    const double vre = pairwise_sum([&](long i) { const double e = sample(i).real() - mre; return e * e; }, 0, nSamples) / (n - 1.0);
    const double vim = pairwise_sum([&](long i) { const double e = sample(i).imag() - mim; return e * e; }, 0, nSamples) / (n - 1.0);
    est.standardError = std::max(std::sqrt(vre / n), std::sqrt(vim / n));
  }
  return est;
}

PathPlan make_plan(const SymMatrix& x, double T, const SimConfig& cfg, int levels) {
  PathPlan plan;
  plan.levels = levels;
  const long block = 1L << (levels - 1);
  const long coarse = std::max(1L, static_cast<long>(std::ceil(T / (cfg.dt * block) - 1e-9)));
  plan.fineSteps = coarse * block;
  plan.fineDt = T / static_cast<double>(plan.fineSteps);
  plan.seed = cfg.seed;
  plan.antithetic = cfg.antithetic;
  plan.x0 = x.mat();
  const Spectrum s = eigen_sym(x);
  plan.lam0 = s.eigenvalues.cwiseMax(0.0);
  plan.V0 = s.eigenvectors;
  return plan;
}

void check_inputs(const AffineParams& params, std::span<const CSymMatrix> us, const SymMatrix& x, double T) {
  if (x.dim() != params.d) throw DimensionError("simulation: x dimension does not match the parameters");
  if (!is_psd(x)) throw DomainError("simulation: x must be positive semidefinite");
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("simulation: T must be finite and nonnegative");
  for (const auto& u : us) {
    if (u.dim() != params.d) throw DimensionError("simulation: u dimension does not match the parameters");
    if (!is_psd(u.re())) throw DomainError("simulation: Re(u) must be positive semidefinite");
  }
}

}  // namespace

StepStreams::StepStreams(const AffineParams& params, std::uint64_t seed, std::uint64_t path)
    : gauss(seed, path, 0), jumps(seed, path, 1), clocks(params.m.atoms.size() + params.mu.atoms.size()) {
  for (auto& c : clocks) c.reset(jumps);
}

SymMatrix step(const AffineParams& params, const SymMatrix& X, double dt, StepStreams& rng, StepJumps* jumps) {
  const EulerModel m(params);
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  if (!is_psd(X)) throw DomainError("step: X must be positive semidefinite");
  if (rng.clocks.size() != m.atoms()) throw DimensionError("step: stream does not match the jump measures");
  Workspace ws;
  ws.init(m, 1);
  LevelState& s = ws.levels[0];
  const Spectrum sp = eigen_sym(X);
  set_initial(s, X.mat(), sp.eigenvalues.cwiseMax(0.0), sp.eigenvectors);

  const double sqrtDt = std::sqrt(dt);
  for (int j = 0; j < m.d; ++j)
    for (int i = 0; i < m.d; ++i) ws.dW(i, j) = sqrtDt * rng.gauss.normal();
  if (jumps != nullptr) {
    jumps->counts.assign(m.atoms(), 0);
    jumps->intensities.assign(m.atoms(), 0.0);
  }
  for (std::size_t k = 0; k < m.atoms(); ++k) {
    const double inc = m.intensity(k, s.X) * dt;
    ws.counts[k] = rng.clocks[k].advance(inc, rng.jumps);
    if (jumps != nullptr) {
      jumps->counts[k] = ws.counts[k];
      jumps->intensities[k] = inc;
    }
  }
  euler_advance(m, s, ws.dW, dt, ws.counts.data(), ws);
  return SymMatrix(s.X);
}

std::vector<std::vector<MCEstimate>> estimate_transform_levels(const AffineParams& params,
                                                               std::span<const CSymMatrix> us,
                                                               const SymMatrix& x, double T,
                                                               const SimConfig& cfg, int levels) {
  cfg.check();
  if (levels < 1 || levels > 20) throw DomainError("estimate_transform_levels: levels must be in [1, 20]");
  check_inputs(params, us, x, T);
  const EulerModel model(params);
  const std::size_t nu = us.size();

  std::vector<std::vector<MCEstimate>> result(static_cast<std::size_t>(levels));
  if (T == 0.0) {
    for (auto& row : result)
      for (const auto& u : us) row.push_back({std::exp(-trace_inner(u, x)), 0.0, cfg.nPaths, 0.0, 0});
    return result;
  }

  const PathPlan plan = make_plan(x, T, cfg, levels);
  const std::size_t stride = static_cast<std::size_t>(levels) * nu;
  std::vector<Complex> values(static_cast<std::size_t>(cfg.nPaths) * stride);
  if (nu > 0) {
    for_each_path(cfg.nPaths, cfg, [&](long path, Workspace& ws) {
      if (!ws.ready) ws.init(model, levels);
      simulate_path(model, plan, path, us, ws, values.data() + static_cast<std::size_t>(path) * stride);
    });
  }
  for (int lev = 0; lev < levels; ++lev) {
    const long stepsAtLevel = plan.fineSteps >> lev;
    const double dtAtLevel = plan.fineDt * static_cast<double>(1L << lev);
    for (std::size_t q = 0; q < nu; ++q)
      result[lev].push_back(
          reduce(values, cfg.nPaths, stride, lev * nu + q, cfg.antithetic, dtAtLevel, stepsAtLevel));
  }
  return result;
}

std::vector<MCEstimate> estimate_transforms(const AffineParams& params, std::span<const CSymMatrix> us,
                                            const SymMatrix& x, double T, const SimConfig& cfg) {
  return estimate_transform_levels(params, us, x, T, cfg, 1).front();
}

MCEstimate estimate_transform(const AffineParams& params, const CSymMatrix& u0, const SymMatrix& x, double T,
                              const SimConfig& cfg) {
  return estimate_transforms(params, std::span<const CSymMatrix>(&u0, 1), x, T, cfg).front();
}

MCEstimate estimate_char_function(const AffineParams& params, const SymMatrix& w, const SymMatrix& x, double T,
                                  const SimConfig& cfg) {
  return estimate_transform(params, CSymMatrix::imaginary(w), x, T, cfg);
}

JumpStatistics simulate_jump_statistics(const AffineParams& params, const SymMatrix& x, double T,
                                        const SimConfig& cfg) {
  cfg.check();
  check_inputs(params, {}, x, T);
  const EulerModel model(params);
  const PathPlan plan = make_plan(x, T, cfg, 1);
  JumpStatistics st;
  st.realized.assign(model.atoms(), 0.0);
  st.compensator.assign(model.atoms(), 0.0);
  st.nPaths = cfg.nPaths;
  st.steps = plan.fineSteps;

  Workspace ws;
  ws.init(model, 1);
  LevelState& s = ws.levels[0];
  const double sqrtDt = std::sqrt(plan.fineDt);
  for (long path = 0; path < cfg.nPaths; ++path) {
    ws.gauss.reseed(plan.seed, static_cast<std::uint64_t>(path), 0);
    for (std::size_t a = 0; a < ws.jumps.size(); ++a) ws.jumps[a].reseed(plan.seed, static_cast<std::uint64_t>(path), 1 + a);
    for (auto& a : ws.arrivals) a.clear();
    set_initial(s, plan.x0, plan.lam0, plan.V0);
    for (long k = 0; k < plan.fineSteps; ++k) {
      for (int j = 0; j < model.d; ++j)
        for (int i = 0; i < model.d; ++i) ws.dW(i, j) = sqrtDt * ws.gauss.normal();
      for (std::size_t a = 0; a < model.atoms(); ++a) {
        const double inc = model.intensity(a, s.X) * plan.fineDt;
        ws.counts[a] = count_arrivals(ws.arrivals[a], s, a, inc, ws.jumps[a]);
        st.realized[a] += ws.counts[a];
        st.compensator[a] += inc;
      }
      euler_advance(model, s, ws.dW, plan.fineDt, ws.counts.data(), ws);
      st.minLambdaState = std::min(st.minLambdaState, s.lam(0));
    }
  }
  return st;
}

}  // namespace psdaffine
