//
// Copyright 2026 The dpgm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpgm/cutting_plane.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "absl/strings/str_format.h"

namespace dpgm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double BallSlack(const Ball& ball, const Vector& theta) {
  return ball.radius * ball.radius - (theta - ball.center).squaredNorm();
}

// Barrier value, +inf outside the interior.
double Barrier(const CutRegion& region, const Vector& theta) {
  double value = 0.0;
  const double base = BallSlack(region.base, theta);
  if (!(base > 0.0)) return kInf;
  value -= std::log(base);
  if (region.outer) {
    const double outer = BallSlack(*region.outer, theta);
    if (!(outer > 0.0)) return kInf;
    value -= std::log(outer);
  }
  for (const Halfspace& cut : region.cuts) {
    const double s = cut.Slack(theta);
    if (!(s > 0.0)) return kInf;
    value -= std::log(s);
  }
  return value;
}

void AddBallTerms(const Ball& ball, const Vector& theta, Vector& grad,
                  Eigen::MatrixXd& hess) {
  const Vector diff = theta - ball.center;
  const double q = ball.radius * ball.radius - diff.squaredNorm();
  grad += 2.0 * diff / q;
  hess.diagonal().array() += 2.0 / q;
  hess += (4.0 / (q * q)) * diff * diff.transpose();
}

}  // namespace

bool CutRegion::StrictlyContains(const Vector& theta) const {
  if (!(BallSlack(base, theta) > 0.0)) return false;
  if (outer && !(BallSlack(*outer, theta) > 0.0)) return false;
  for (const Halfspace& cut : cuts) {
    if (!(cut.Slack(theta) > 0.0)) return false;
  }
  return true;
}

absl::StatusOr<Vector> StrictlyFeasiblePoint(const CutRegion& region,
                                             const std::optional<Vector>& hint) {
  const int d = static_cast<int>(region.base.center.size());
  Vector x = hint.value_or(region.base.center);
  if (x.size() != d) {
    return absl::InvalidArgumentError("hint dimension does not match region.");
  }
  if (region.StrictlyContains(x)) return x;

  // Phase I: minimise s subject to g_i(x) < s with a log barrier on (x, s).
  // Balls use g = (|x-c|^2 - r^2) / (2r), cuts the normalised slack.
  std::vector<Ball> balls = {region.base};
  if (region.outer) balls.push_back(*region.outer);
  std::vector<Halfspace> cuts;
  for (const Halfspace& cut : region.cuts) {
    const double norm = cut.normal.norm();
    cuts.push_back({cut.normal / norm, cut.offset / norm});
  }
  const int m = static_cast<int>(balls.size() + cuts.size());
  auto constraints = [&](const Vector& y) {
    std::vector<double> g;
    for (const Ball& b : balls) {
      g.push_back(((y - b.center).squaredNorm() - b.radius * b.radius) /
                  (2.0 * b.radius));
    }
    for (const Halfspace& c : cuts) g.push_back(-c.Slack(y));
    return g;
  };
  auto objective = [&](const Vector& y, double s, double t) {
    double value = t * s;
    for (double gi : constraints(y)) {
      if (!(s - gi > 0.0)) return kInf;
      value -= std::log(s - gi);
    }
    return value;
  };
  std::vector<double> g0 = constraints(x);
  double s = *std::max_element(g0.begin(), g0.end()) + 1.0;
  double t = 1.0 / std::max(1.0, region.base.radius);
  for (int outer_iter = 0; outer_iter < 60; ++outer_iter, t *= 8.0) {
    for (int iter = 0; iter < 100; ++iter) {
      Vector grad = Vector::Zero(d + 1);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d + 1, d + 1);
      grad[d] = t;
      auto add = [&](const Vector& dg, double u, double curvature) {
        Vector a(d + 1);
        a.head(d) = dg;
        a[d] = -1.0;
        grad += a / u;
        hess += (a / u) * (a / u).transpose();
        hess.topLeftCorner(d, d).diagonal().array() += curvature / u;
      };
      const std::vector<double> g = constraints(x);
      int i = 0;
      for (const Ball& b : balls) {
        add((x - b.center) / b.radius, s - g[i++], 1.0 / b.radius);
      }
      for (const Halfspace& c : cuts) add(c.normal, s - g[i++], 0.0);
      const Vector step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      if (!(decrement > 1e-20)) break;
      const double value = objective(x, s, t);
      double alpha = 1.0;
      bool moved = false;
      for (int backtrack = 0; backtrack < 60; ++backtrack, alpha *= 0.5) {
        const Vector y = x + alpha * step.head(d);
        const double sy = s + alpha * step[d];
        if (objective(y, sy, t) <= value - 0.25 * alpha * decrement) {
          x = y;
          s = sy;
          moved = true;
          break;
        }
      }
      if (region.StrictlyContains(x)) return x;
      if (!moved || decrement < 1e-12) break;
    }
    if (region.StrictlyContains(x)) return x;
    // Duality gap bound: the optimal s is at least s - m / t.
    if (s - m / t >= 0.0) break;
  }
  return absl::FailedPreconditionError(
      "Cut region has no strictly feasible point.");
}

absl::StatusOr<Vector> AnalyticCentre(const CutRegion& region, double tol,
                                      const std::optional<Vector>& hint) {
  if (!(region.base.radius > 0.0)) {
    return absl::FailedPreconditionError("Base ball has empty interior.");
  }
  const int d = static_cast<int>(region.base.center.size());
  for (const Halfspace& cut : region.cuts) {
    if (cut.normal.size() != d || !cut.normal.allFinite() ||
        !(cut.normal.norm() > 0.0) || !std::isfinite(cut.offset)) {
      return absl::InvalidArgumentError("Cut normals must be finite, nonzero "
                                        "and match the region dimension.");
    }
  }
  absl::StatusOr<Vector> start = StrictlyFeasiblePoint(region, hint);
  if (!start.ok()) return start.status();
  Vector theta = *std::move(start);
  double value = Barrier(region, theta);

  for (int iter = 0; iter < 100; ++iter) {
    Vector grad = Vector::Zero(d);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
    AddBallTerms(region.base, theta, grad, hess);
    if (region.outer) AddBallTerms(*region.outer, theta, grad, hess);
    for (const Halfspace& cut : region.cuts) {
      const double s = cut.Slack(theta);
      grad += cut.normal / s;
      hess += (cut.normal / s) * (cut.normal / s).transpose();
    }
    if (grad.norm() <= tol) break;
    const Vector step = -hess.ldlt().solve(grad);
    const double decrement = -grad.dot(step);
    if (!(decrement > 1e-24)) break;

    double t = 1.0;
    bool moved = false;
    for (int backtrack = 0; backtrack < 60; ++backtrack, t *= 0.5) {
      const Vector candidate = theta + t * step;
      const double candidate_value = Barrier(region, candidate);
      if (candidate_value <= value - 0.25 * t * decrement) {
        theta = candidate;
        value = candidate_value;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return theta;
}

absl::StatusOr<double> EstimateVolumeFraction(const CutRegion& region,
                                              const Halfspace& cut, int samples,
                                              Rng& rng) {
  const int d = static_cast<int>(region.base.center.size());
  if (d > 6) {
    return absl::InvalidArgumentError(
        "Rejection sampling is limited to d <= 6.");
  }
  if (samples <= 0) return absl::InvalidArgumentError("samples must be > 0.");
  std::normal_distribution<double> normal(0.0, 1.0);
  int accepted = 0;
  int inside = 0;
  for (int s = 0; s < samples; ++s) {
    Vector direction(d);
    for (int j = 0; j < d; ++j) direction[j] = normal(rng);
    const double radius =
        region.base.radius * std::pow(rng.UniformOpen(), 1.0 / d);
    const Vector x = region.base.center + radius * direction.normalized();
    if (!region.StrictlyContains(x)) continue;
    ++accepted;
    if (cut.Slack(x) > 0.0) ++inside;
  }
  if (accepted == 0) {
    return absl::FailedPreconditionError(
        "No samples landed in the region; cannot estimate a fraction.");
  }
  return static_cast<double>(inside) / accepted;
}

absl::StatusOr<int> ExpMechSelect(const std::vector<Vector>& candidates,
                                  const Dataset& data, double epsilon,
                                  double scale, Rng& rng) {
  if (candidates.empty()) {
    return absl::InvalidArgumentError("No candidates to select from.");
  }
  if (!(scale > 0.0) || !(epsilon > 0.0)) {
    return absl::InvalidArgumentError("epsilon and scale must be positive.");
  }
  std::vector<double> log_weights;
  log_weights.reserve(candidates.size());
  for (const Vector& c : candidates) {
    absl::StatusOr<double> f = GmObjective(c, data);
    if (!f.ok()) return f.status();
    log_weights.push_back(-epsilon * *f / scale);
  }
  return SampleFromLogWeights(log_weights, rng);
}

absl::Status CuttingPlaneConfig::Validate() const {
  if (!std::isfinite(budget.epsilon) || budget.epsilon <= 0.0) {
    return absl::InvalidArgumentError("Epsilon must be finite and positive.");
  }
  if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
    return absl::InvalidArgumentError("Delta must lie in (0, 1).");
  }
  if (!(tau > 0.0 && tau <= 1.0)) {
    return absl::InvalidArgumentError("tau must lie in (0, 1].");
  }
  if (!(c_kft > 0.0)) return absl::InvalidArgumentError("c_kft must be > 0.");
  if (k_ft < 0) return absl::InvalidArgumentError("k_ft must be >= 0.");
  return absl::OkStatus();
}

ZcdpBudget CuttingPlaneRho(const ApproxDpBudget& budget) {
  const double eps = budget.epsilon;
  return ZcdpBudget{eps * eps /
                    (16.0 * std::log(2.0 / budget.delta) + 8.0 * eps)};
}

int CuttingPlaneIterations(const CuttingPlaneConfig& cfg, int n, int d,
                           double rho) {
  if (cfg.k_ft > 0) return cfg.k_ft;
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const double kappa = n * std::sqrt(cfg.tau * rho) / sqrt_d + sqrt_d;
  const double k = cfg.c_kft * (d / cfg.tau) * std::log(kappa);
  return std::max(1, static_cast<int>(std::ceil(k)));
}

absl::StatusOr<CuttingPlaneTrace> RunCuttingPlane(const Dataset& data,
                                                  CutRegion region, int k_ft,
                                                  const ZcdpBudget& budget,
                                                  Rng& rng, double centre_tol,
                                                  bool conservative) {
  if (k_ft < 1) return absl::InvalidArgumentError("k_ft must be positive.");
  if (!std::isfinite(budget.rho) || budget.rho <= 0.0) {
    return absl::InvalidArgumentError("rho must be finite and positive.");
  }
  if (region.base.center.size() != data.d()) {
    return absl::InvalidArgumentError("Region dimension does not match data.");
  }
  double sigma = std::sqrt(k_ft / budget.rho);
  if (conservative) sigma *= 2.0;

  CuttingPlaneTrace trace;
  std::optional<Vector> hint;
  for (int t = 0; t < k_ft; ++t) {
    absl::StatusOr<Vector> centre = AnalyticCentre(region, centre_tol, hint);
    if (!centre.ok()) {
      if (absl::IsFailedPrecondition(centre.status())) {
        trace.stopped_early = true;
        break;
      }
      return centre.status();
    }
    trace.iterates.push_back(*centre);
    Rng step_rng = rng.Fork("direction", t);
    absl::StatusOr<Vector> noise = GaussianVector(sigma, data.d(), step_rng);
    if (!noise.ok()) return noise.status();
    const Vector direction = GmSubgradientUnchecked(*centre, data) + *noise;
    if (!(direction.norm() > 0.0)) {
      trace.stopped_early = true;
      break;
    }
    Halfspace cut{direction, direction.dot(*centre)};
    region.cuts.push_back(cut);
    trace.cuts.push_back(std::move(cut));
    hint = *std::move(centre);
  }
  return trace;
}

absl::StatusOr<CuttingPlaneResult> LocDpCuttingPlane(
    const Dataset& data, const CuttingPlaneConfig& cfg, double r, double beta,
    double R, Rng& rng, const LocalizationOptions& options) {
  if (auto status = cfg.Validate(); !status.ok()) return status;
  const int d = data.d();
  const ZcdpBudget rho = CuttingPlaneRho(cfg.budget);

  Rng loc_rng = rng.Fork("localization");
  absl::StatusOr<LocalizationResult> loc = Localization(
      data, ZcdpBudget{rho.rho / 2.0}, r,
      std::min(beta / 3.0, cfg.budget.delta / 2.0), R, loc_rng, options);
  if (!loc.ok()) return loc.status();

  CuttingPlaneResult result;
  result.ledger.Append(loc->ledger);
  result.localization = *std::move(loc);
  if (result.localization.failed) {
    result.failed = true;
    result.theta = Vector::Zero(d);
    result.ledger.Record("cutting-plane/directions", rho.rho / 2.0,
                         /*spent=*/false);
    return result;
  }

  CutRegion region;
  region.base = result.localization.localized;
  if (region.base.center.norm() + region.base.radius > R) {
    region.outer = Ball{Vector::Zero(d), R};
  }
  result.k_ft = CuttingPlaneIterations(cfg, data.n(), d, rho.rho);
  Rng cut_rng = rng.Fork("cutting-plane");
  absl::StatusOr<CuttingPlaneTrace> trace =
      RunCuttingPlane(data, std::move(region), result.k_ft, rho, cut_rng,
                      cfg.centre_tol, cfg.conservative_noise);
  if (!trace.ok()) return trace.status();
  result.ledger.Record("cutting-plane/directions", rho.rho / 2.0);
  result.trace = *std::move(trace);

  if (result.trace.iterates.empty()) {
    // The starting region had no interior; nothing to select from.
    result.failed = true;
    result.theta = result.localization.theta0;
    return result;
  }
  Rng select_rng = rng.Fork("selection");
  absl::StatusOr<int> selected =
      ExpMechSelect(result.trace.iterates, data, cfg.budget.epsilon,
                    448.0 * result.localization.delta_hat, select_rng);
  if (!selected.ok()) return selected.status();
  result.selected = *selected;
  result.theta = result.trace.iterates[*selected];
  return result;
}

}  // namespace dpgm
