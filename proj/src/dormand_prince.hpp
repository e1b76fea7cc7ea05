// Embedded Dormand-Prince 5(4) pair with PI step-size control and the
// standard fourth-order continuous extension.
#ifndef PSDAFFINE_SRC_DORMAND_PRINCE_HPP
#define PSDAFFINE_SRC_DORMAND_PRINCE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace psdaffine::detail {

struct DopriSettings {
  double relTol;
  double absTol;
  double maxStep;
  double initialStep;  // 0: automatic
  long maxSteps;
};

enum class DopriStop { Done, Aborted, StepUnderflow, MaxSteps };

struct DopriStats {
  long accepted = 0;
  long rejected = 0;
  double lastTime = 0.0;
};

/// Dense-output coefficients of one accepted step: y(t0 + theta h) =
/// r1 + theta (r2 + (1-theta) (r3 + theta (r4 + (1-theta) r5))).
struct DopriDense {
  double t0;
  double h;
  Eigen::VectorXd r1, r2, r3, r4, r5;
};

inline Eigen::VectorXd dopri_dense_eval(const DopriDense& s, double t) {
  const double th = (t - s.t0) / s.h;
  const double th1 = 1.0 - th;
  return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
}

/// Integrates y' = f(t, y) from t = 0 to tEnd. `onStep(dense, t, y)` is called
/// after every accepted step and may return false to stop. Steps are clipped
/// so that every checkpoint in (0, tEnd) is hit exactly.
template <class F, class OnStep>
DopriStop dopri5(F&& f, Eigen::VectorXd y, double tEnd, const DopriSettings& cfg, std::span<const double> checkpoints,
                 OnStep&& onStep, DopriStats& stats) {
  using Eigen::VectorXd;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
  // PI controller constants.
  constexpr double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
  constexpr double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  const auto n = y.size();
  double t = 0.0;
  stats = {};
  if (tEnd <= 0.0) return DopriStop::Done;

  auto err_scale = [&](const VectorXd& a, const VectorXd& b) {
    return (cfg.absTol + cfg.relTol * a.cwiseAbs().cwiseMax(b.cwiseAbs()).array()).matrix();
  };

  VectorXd k1 = f(t, y), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), ytmp(n), err(n);

  double h = cfg.initialStep;
  if (h <= 0.0) {
    const VectorXd sc = err_scale(y, y);
    const double dnf = (k1.array() / sc.array()).matrix().norm() / std::sqrt(static_cast<double>(n));
    const double dny = (y.array() / sc.array()).matrix().norm() / std::sqrt(static_cast<double>(n));
    double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h0 = std::min({h0, cfg.maxStep, tEnd});
    ytmp = y + h0 * k1;
    const VectorXd f1 = f(h0, ytmp);
    const double der2 = ((f1 - k1).array() / sc.array()).matrix().norm() / std::sqrt(static_cast<double>(n)) / h0;
    const double der12 = std::max(std::abs(der2), dnf);
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h0, h1, cfg.maxStep, tEnd});
  }

  std::size_t nextCp = 0;
  while (nextCp < checkpoints.size() && checkpoints[nextCp] <= 0.0) ++nextCp;

  double facold = 1e-4;
  bool lastRejected = false;
  long steps = 0;
  while (t < tEnd) {
    if (++steps > cfg.maxSteps) {
      stats.lastTime = t;
      return DopriStop::MaxSteps;
    }
    double target = tEnd;
    while (nextCp < checkpoints.size() && checkpoints[nextCp] <= t) ++nextCp;
    if (nextCp < checkpoints.size() && checkpoints[nextCp] < tEnd) target = checkpoints[nextCp];
    h = std::min(h, cfg.maxStep);
    const double hProposed = h;
    bool hitsTarget = false;
    if (t + h >= target || t + 1.01 * h >= target) {
      h = target - t;
      hitsTarget = true;
    }
    if (h <= 16.0 * eps * std::max(1.0, std::abs(t))) {
      stats.lastTime = t;
      return DopriStop::StepUnderflow;
    }

    ytmp = y + h * a21 * k1;
    k2 = f(t + c2 * h, ytmp);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    k3 = f(t + c3 * h, ytmp);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    k4 = f(t + c4 * h, ytmp);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5 = f(t + c5 * h, ytmp);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    k6 = f(t + h, ytmp);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    k7 = f(t + h, y1);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double errNorm = (err.array() / err_scale(y, y1).array()).abs().maxCoeff();
    if (!std::isfinite(errNorm)) errNorm = 1e10;

    const double fac11 = std::pow(errNorm, expo1);
    if (errNorm <= 1.0) {
      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      facold = std::max(errNorm, 1e-4);
      ++stats.accepted;

      DopriDense dense{t, h, y, y1 - y, VectorXd(), VectorXd(), VectorXd()};
      dense.r3 = h * k1 - dense.r2;
      dense.r4 = dense.r2 - h * k7 - dense.r3;
      dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      const double hUsed = h;
      t = hitsTarget ? target : t + h;
      y = y1;
      k1 = k7;
      stats.lastTime = t;
      if (!onStep(dense, t, y)) return DopriStop::Aborted;

      double hnew = hUsed / fac;
      if (lastRejected) hnew = std::min(hnew, hUsed);
      lastRejected = false;
      // A step shortened to hit a target does not limit the next one.
      h = hitsTarget ? std::max(hnew, hProposed) : hnew;
    } else {
      h /= std::min(facc1, fac11 / safe);
      lastRejected = true;
      ++stats.rejected;
    }
  }
  return DopriStop::Done;
}

}  // namespace psdaffine::detail

#endif  // PSDAFFINE_SRC_DORMAND_PRINCE_HPP
