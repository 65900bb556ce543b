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

// Private estimation of the quantile radius around the geometric median.
//
// For every data point x_i and radius nu let N_i(nu) count the data points in
// the closed ball B(x_i, nu), the point itself included. The query
//
//   N(nu) = mean of the m = ceil(gamma n) largest N_i(nu)
//
// changes by at most 3 when a single point is replaced. Evaluating N on the
// doubling grid r, 2r, ..., 2^K r with K = ceil(log2(2R / r)) and feeding the
// values to AboveThreshold yields the smallest grid radius whose top-m
// neighbourhoods hold (noisily) more than m points.

#ifndef DPGM_RADIUS_FINDER_H_
#define DPGM_RADIUS_FINDER_H_

#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgm/geometry.h"
#include "dpgm/privacy.h"

namespace dpgm {

struct RadiusFinderConfig {
  double gamma = 0.75;
  ZcdpBudget budget;
  double beta = 0.1;
  // Grid floor.
  double r = 0.05;
  // A-priori radius of the data.
  double R = 100.0;

  absl::Status Validate() const;
};

struct RadiusEstimate {
  // Grid index i-hat; empty on Fail.
  std::optional<int> index;
  // 2^index * r, or 0 on Fail.
  double value = 0.0;

  bool failed() const { return !index.has_value(); }
};

// Each row holds the distances from x_i to every point (itself included),
// sorted ascending. Built once in O(n^2 d + n^2 log n) and reused across grid
// values.
class SortedNeighborDistances {
 public:
  explicit SortedNeighborDistances(const Dataset& data);

  int n() const { return n_; }
  // N_i(nu).
  int Count(int i, double nu) const;
  std::vector<int> Counts(double nu) const;

 private:
  int n_;
  std::vector<double> rows_;
};

std::vector<int> NeighborCounts(const Dataset& data, double nu);

// Mean of the m largest counts. Fails unless 1 <= m <= counts.size().
absl::StatusOr<double> TopMAverage(std::vector<int> counts, int m);

// K = ceil(log2(2R / r)); the grid has K + 1 values.
int RadiusGridMaxIndex(double r, double R);

// m + 18 / sqrt(2 rho) * ln((2 / beta) * K).
double RadiusFinderThreshold(const RadiusFinderConfig& cfg, int n);

// N(2^i r) for i = 0..K.
std::vector<double> RadiusGridQueries(const SortedNeighborDistances& distances,
                                      const RadiusFinderConfig& cfg);

absl::StatusOr<RadiusEstimate> RadiusFinder(const Dataset& data,
                                            const RadiusFinderConfig& cfg,
                                            Rng& rng);

// Same as above with the pairwise distances precomputed.
absl::StatusOr<RadiusEstimate> RadiusFinder(
    const SortedNeighborDistances& distances, const RadiusFinderConfig& cfg,
    Rng& rng);

}  // namespace dpgm

#endif  // DPGM_RADIUS_FINDER_H_
