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

#include "dpgm/dpgd.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"

namespace dpgm {

double DpgdSigma(const ZcdpBudget& budget, int n, int steps,
                 bool conservative) {
  const double sigma = std::sqrt(steps / (2.0 * budget.rho * n * n));
  return conservative ? 2.0 * sigma : sigma;
}

absl::StatusOr<Vector> Dpgd(const Vector& init, const Dataset& data,
                            const ZcdpBudget& budget,
                            const FeasibleSet& feasible, double eta, int steps,
                            Rng& rng, const DpgdOptions& options) {
  if (init.size() != data.d()) {
    return absl::InvalidArgumentError("init dimension does not match data.");
  }
  if (!std::isfinite(budget.rho) || budget.rho <= 0.0) {
    return absl::InvalidArgumentError("rho must be finite and positive.");
  }
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    return absl::InvalidArgumentError("eta must be finite and positive.");
  }
  if (steps < 1) return absl::InvalidArgumentError("T must be at least 1.");
  const double tol = std::max(options.projection_tol, 1e-12) *
                     std::max(1.0, feasible.outer.radius);
  if (!feasible.outer.Contains(init, tol) || !feasible.inner.Contains(init, tol)) {
    return absl::InvalidArgumentError("init lies outside the feasible set.");
  }

  const int n = data.n();
  const double sigma =
      DpgdSigma(budget, n, steps, options.conservative_noise);
  Vector theta = init;
  Vector sum = Vector::Zero(data.d());
  for (int t = 0; t < steps; ++t) {
    absl::StatusOr<Vector> noise = GaussianVector(sigma, data.d(), rng);
    if (!noise.ok()) return noise.status();
    Vector step = GmSubgradientUnchecked(theta, data) / n + *noise;
    absl::StatusOr<Vector> next =
        ProjectBallIntersection(theta - eta * step, feasible.outer,
                                feasible.inner, options.projection_tol);
    if (!next.ok()) return next.status();
    theta = *std::move(next);
    sum += theta;
    if (options.on_iterate) options.on_iterate(theta);
  }
  return Vector(sum / steps);
}

int WarmupRounds(double R, double delta_hat) {
  if (!(delta_hat > 0.0) || delta_hat >= R) return 0;
  return static_cast<int>(std::ceil(std::log2(R / delta_hat)));
}

double WarmupRadius(double R, double delta_hat, int round) {
  double rad = R;
  for (int t = 0; t < round; ++t) rad = 0.5 * rad + 12.0 * delta_hat;
  return rad;
}

absl::StatusOr<LocalizationResult> Localization(
    const Dataset& data, const ZcdpBudget& budget, double r, double beta,
    double R, Rng& rng, const LocalizationOptions& options) {
  if (!std::isfinite(budget.rho) || budget.rho <= 0.0) {
    return absl::InvalidArgumentError("rho must be finite and positive.");
  }
  if (options.warmup_steps < 1) {
    return absl::InvalidArgumentError("warmup_steps must be positive.");
  }
  const int n = data.n();
  const int d = data.d();

  RadiusFinderConfig rf;
  rf.gamma = 0.75;
  rf.budget = ZcdpBudget{budget.rho / 2.0};
  rf.beta = beta / 2.0;
  rf.r = r;
  rf.R = R;
  if (auto status = rf.Validate(); !status.ok()) return status;

  Rng rf_rng = rng.Fork("radius-finder");
  absl::StatusOr<RadiusEstimate> estimate =
      options.distances != nullptr
          ? RadiusFinder(*options.distances, rf, rf_rng)
          : RadiusFinder(data, rf, rf_rng);
  if (!estimate.ok()) return estimate.status();

  LocalizationResult result;
  result.theta0 = Vector::Zero(d);
  result.ledger.Record("localization/radius-finder", rf.budget.rho);
  if (estimate->failed()) {
    result.failed = true;
    result.ledger.Record("localization/warmup-dpgd", budget.rho / 2.0,
                         /*spent=*/false);
    return result;
  }

  const double delta_hat = estimate->value;
  const int rounds = WarmupRounds(R, delta_hat);
  const Ball outer{Vector::Zero(d), R};
  Vector theta = Vector::Zero(d);
  double rad = R;
  if (rounds == 0) {
    result.ledger.Record("localization/warmup-dpgd", budget.rho / 2.0,
                         /*spent=*/false);
  }
  for (int t = 0; t < rounds; ++t) {
    const FeasibleSet feasible{outer, Ball{theta, rad}};
    const double eta =
        rad * std::sqrt(2.0 * d * rounds / (3.0 * budget.rho * n * n));
    const ZcdpBudget round_budget{budget.rho / (2.0 * rounds)};
    Rng round_rng = rng.Fork("warmup", t);
    absl::StatusOr<Vector> next =
        Dpgd(theta, data, round_budget, feasible, eta, options.warmup_steps,
             round_rng, options.dpgd);
    if (!next.ok()) return next.status();
    result.ledger.Record(absl::StrFormat("localization/warmup-dpgd[%d]", t),
                         round_budget.rho);
    theta = *std::move(next);
    if (options.on_round) options.on_round(t, theta, rad);
    rad = 0.5 * rad + 12.0 * delta_hat;
  }

  result.theta0 = theta;
  result.delta_hat = delta_hat;
  result.localized = Ball{theta, 25.0 * delta_hat};
  result.rounds = rounds;
  return result;
}

int FinetuneSteps(int n, int d, double rho) {
  const double steps = std::floor(static_cast<double>(n) * n * rho / (256.0 * d));
  return static_cast<int>(std::max(1.0, std::min(steps, 1e9)));
}

absl::StatusOr<LocDpgdResult> LocDpgd(const Dataset& data,
                                      const ZcdpBudget& budget, double r,
                                      double beta, double R, Rng& rng,
                                      const LocalizationOptions& options) {
  if (!std::isfinite(budget.rho) || budget.rho <= 0.0) {
    return absl::InvalidArgumentError("rho must be finite and positive.");
  }
  const int n = data.n();
  const int d = data.d();
  Rng loc_rng = rng.Fork("localization");
  absl::StatusOr<LocalizationResult> loc =
      Localization(data, ZcdpBudget{budget.rho / 2.0}, r, beta / 2.0, R,
                   loc_rng, options);
  if (!loc.ok()) return loc.status();

  LocDpgdResult result;
  result.ledger.Append(loc->ledger);
  result.localization = *std::move(loc);
  if (result.localization.failed) {
    result.failed = true;
    result.theta = Vector::Zero(d);
    result.ledger.Record("finetune-dpgd", budget.rho / 2.0, /*spent=*/false);
    return result;
  }

  const double delta_hat = result.localization.delta_hat;
  const FeasibleSet feasible{Ball{Vector::Zero(d), R},
                             result.localization.localized};
  result.finetune_eta =
      50.0 * delta_hat * std::sqrt(d / (6.0 * budget.rho * n * n));
  result.finetune_steps = FinetuneSteps(n, d, budget.rho);
  Rng ft_rng = rng.Fork("finetune");
  absl::StatusOr<Vector> theta =
      Dpgd(result.localization.theta0, data, ZcdpBudget{budget.rho / 2.0},
           feasible, result.finetune_eta, result.finetune_steps, ft_rng,
           options.dpgd);
  if (!theta.ok()) return theta.status();
  result.ledger.Record("finetune-dpgd", budget.rho / 2.0);
  result.theta = *std::move(theta);
  return result;
}

}  // namespace dpgm
