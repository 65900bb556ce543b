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

#include "dpgm/radius_finder.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "absl/strings/str_format.h"

namespace dpgm {
namespace {

int QuantileCount(double gamma, int n) {
  return std::clamp(static_cast<int>(std::ceil(gamma * n - 1e-9)), 1, n);
}

}  // namespace

absl::Status RadiusFinderConfig::Validate() const {
  if (!(gamma > 0.5 && gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in (1/2, 1].");
  }
  if (!std::isfinite(budget.rho) || budget.rho <= 0.0) {
    return absl::InvalidArgumentError("rho must be finite and positive.");
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    return absl::InvalidArgumentError("beta must lie in (0, 1].");
  }
  if (!(r > 0.0 && r < R) || !std::isfinite(R)) {
    return absl::InvalidArgumentError("Need 0 < r < R < inf.");
  }
  return absl::OkStatus();
}

SortedNeighborDistances::SortedNeighborDistances(const Dataset& data)
    : n_(data.n()), rows_(static_cast<size_t>(data.n()) * data.n()) {
  const Eigen::MatrixXd& x = data.points();
  for (int i = 0; i < n_; ++i) {
    double* row = rows_.data() + static_cast<size_t>(i) * n_;
    for (int j = 0; j < n_; ++j) {
      row[j] = (i == j) ? 0.0 : (x.col(i) - x.col(j)).norm();
    }
    std::sort(row, row + n_);
  }
}

int SortedNeighborDistances::Count(int i, double nu) const {
  const double* row = rows_.data() + static_cast<size_t>(i) * n_;
  return static_cast<int>(std::upper_bound(row, row + n_, nu) - row);
}

std::vector<int> SortedNeighborDistances::Counts(double nu) const {
  std::vector<int> counts(n_);
  for (int i = 0; i < n_; ++i) counts[i] = Count(i, nu);
  return counts;
}

std::vector<int> NeighborCounts(const Dataset& data, double nu) {
  std::vector<int> counts(data.n(), 0);
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.n(); ++j) {
      if ((data.point(i) - data.point(j)).norm() <= nu) ++counts[i];
    }
  }
  return counts;
}

absl::StatusOr<double> TopMAverage(std::vector<int> counts, int m) {
  if (m < 1 || m > static_cast<int>(counts.size())) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "m = %d must lie in [1, %d].", m, counts.size()));
  }
  std::nth_element(counts.begin(), counts.begin() + (m - 1), counts.end(),
                   std::greater<int>());
  double sum = 0.0;
  for (int i = 0; i < m; ++i) sum += counts[i];
  return sum / m;
}

int RadiusGridMaxIndex(double r, double R) {
  return std::max(0, static_cast<int>(std::ceil(std::log2(2.0 * R / r))));
}

double RadiusFinderThreshold(const RadiusFinderConfig& cfg, int n) {
  const int m = QuantileCount(cfg.gamma, n);
  const int grid_max = RadiusGridMaxIndex(cfg.r, cfg.R);
  return m + 18.0 / std::sqrt(2.0 * cfg.budget.rho) *
                 std::log((2.0 / cfg.beta) * std::max(grid_max, 1));
}

std::vector<double> RadiusGridQueries(const SortedNeighborDistances& distances,
                                      const RadiusFinderConfig& cfg) {
  const int m = QuantileCount(cfg.gamma, distances.n());
  const int grid_max = RadiusGridMaxIndex(cfg.r, cfg.R);
  std::vector<double> queries;
  queries.reserve(grid_max + 1);
  for (int i = 0; i <= grid_max; ++i) {
    const double nu = std::ldexp(cfg.r, i);
    queries.push_back(*TopMAverage(distances.Counts(nu), m));
  }
  return queries;
}

absl::StatusOr<RadiusEstimate> RadiusFinder(
    const SortedNeighborDistances& distances, const RadiusFinderConfig& cfg,
    Rng& rng) {
  if (auto status = cfg.Validate(); !status.ok()) return status;
  const std::vector<double> queries = RadiusGridQueries(distances, cfg);
  const double threshold = RadiusFinderThreshold(cfg, distances.n());
  absl::StatusOr<std::optional<int>> index =
      AboveThreshold(queries, cfg.budget, threshold, rng);
  if (!index.ok()) return index.status();
  RadiusEstimate estimate;
  if (index->has_value()) {
    estimate.index = **index;
    estimate.value = std::ldexp(cfg.r, **index);
  }
  return estimate;
}

absl::StatusOr<RadiusEstimate> RadiusFinder(const Dataset& data,
                                            const RadiusFinderConfig& cfg,
                                            Rng& rng) {
  if (auto status = cfg.Validate(); !status.ok()) return status;
  return RadiusFinder(SortedNeighborDistances(data), cfg, rng);
}

}  // namespace dpgm
