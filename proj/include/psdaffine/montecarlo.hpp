// Monte Carlo simulation of a conservative affine process on S_d^+ through
// its semimartingale decomposition
//
//   dX = (b + B(X)) dt + sqrt(X) dW Sigma + Sigma^T dW^T sqrt(X) + dJ,
//
// with Sigma^T Sigma = alpha and jumps xi_k arriving at rate w_k (m atoms) or
// <X, M_k> (mu atoms). Full-truncation Euler, projected back onto the cone
// after every step.
//
// Every path owns independent random streams keyed by (seed, path index), so
// the estimate does not depend on how paths are distributed across threads.
#ifndef PSDAFFINE_MONTECARLO_HPP
#define PSDAFFINE_MONTECARLO_HPP

#include "psdaffine/model.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace psdaffine {

/// Keyed random stream: a std::mt19937_64 whose seed is a splitmix64 hash
/// of (seed, index, stream).
class PathRng {
public:
  PathRng() : PathRng(0, 0, 0) {}
  PathRng(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) { reseed(seed, index, stream); }

  void reseed(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);
  double normal() { return normal_(engine_); }
  double exponential() { return exponential_(engine_); }
  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::exponential_distribution<double> exponential_;
};

enum class Scheme { EulerProject };
enum class Execution { Serial, Parallel };

struct SimConfig {
  long nPaths = 10000;
  double dt = 1.0 / 1024.0;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::EulerProject;
  /// Paths 2k and 2k+1 use negated Brownian increments; jumps stay
  /// independent. Requires an even path count.
  bool antithetic = false;
  Execution execution = Execution::Parallel;
  /// Worker cap; 0 reads PSDAFFINE_THREADS, falling back to the machine.
  int threads = 0;

  void check() const;
};

struct MCEstimate {
  Complex mean;
  /// max of the standard errors of the real and imaginary parts.
  double standardError = 0.0;
  long nPaths = 0;
  double dt = 0.0;
  long steps = 0;
};

struct DiffusionFactor {
  MatrixXd sigma;  // sigma^T sigma = alpha
};

/// Sigma = diag(sqrt(lambda)) Q^T from alpha = Q diag(lambda) Q^T.
DiffusionFactor diffusion_factor(const SymMatrix& alpha);

/// Jump arrivals of one atom as a unit-rate Poisson process run on the
/// integrated intensity clock.
class JumpClock {
public:
  void reset(PathRng& rng);
  /// Number of arrivals while the clock advances by `increment`.
  int advance(double increment, PathRng& rng);
  double elapsed() const { return elapsed_; }

private:
  double elapsed_ = 0.0;
  double next_ = 0.0;
};

/// Per-path random state for step().
struct StepStreams {
  PathRng gauss;
  PathRng jumps;
  std::vector<JumpClock> clocks;  // m atoms first, then mu atoms

  StepStreams(const AffineParams& params, std::uint64_t seed, std::uint64_t path);
};

struct StepJumps {
  std::vector<int> counts;          // per atom, same order as the clocks
  std::vector<double> intensities;  // frozen intensity * dt per atom
};

/// One Euler step from X, followed by projection onto S_d^+. Throws
/// DomainError for non-conservative parameters.
SymMatrix step(const AffineParams& params, const SymMatrix& X, double dt, StepStreams& rng,
               StepJumps* jumps = nullptr);

/// E[exp(-<u, X_T>) | X_0 = x] for each u on one set of simulated paths.
std::vector<MCEstimate> estimate_transforms(const AffineParams& params, std::span<const CSymMatrix> us,
                                            const SymMatrix& x, double T, const SimConfig& cfg);
MCEstimate estimate_transform(const AffineParams& params, const CSymMatrix& u0, const SymMatrix& x, double T,
                              const SimConfig& cfg);
/// estimate_transform at u0 = i w.
MCEstimate estimate_char_function(const AffineParams& params, const SymMatrix& w, const SymMatrix& x, double T,
                                  const SimConfig& cfg);

/// Coupled estimates at step sizes dt, 2dt, ..., 2^{levels-1} dt: the
/// coarse Brownian increments are sums of the fine ones and every level
/// reads the same unit-rate jump clocks. result[level][u].
std::vector<std::vector<MCEstimate>> estimate_transform_levels(const AffineParams& params,
                                                               std::span<const CSymMatrix> us,
                                                               const SymMatrix& x, double T,
                                                               const SimConfig& cfg, int levels);

struct JumpStatistics {
  std::vector<double> realized;     // total jump count per atom over all paths
  std::vector<double> compensator;  // summed frozen intensity * dt per atom
  long nPaths = 0;
  long steps = 0;
  double minLambdaState = std::numeric_limits<double>::infinity();  // min lambda_min over all stored states
};

/// Realized jump counts and their discrete compensators along simulated
/// paths (serial).
JumpStatistics simulate_jump_statistics(const AffineParams& params, const SymMatrix& x, double T,
                                        const SimConfig& cfg);

/// Worker count that Execution::Parallel would use for `cfg`.
int resolve_threads(const SimConfig& cfg);

}  // namespace psdaffine

#endif  // PSDAFFINE_MONTECARLO_HPP
