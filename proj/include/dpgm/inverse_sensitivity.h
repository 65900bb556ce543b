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

// Pure-DP sampling of the geometric median through inverse sensitivity.
//
// len(X, theta) is the fewest points of X that must be changed so that theta
// becomes a geometric median. Moving a point onto theta adds a unit ball to
// the subdifferential there, and no other placement does better, so
//
//   len = min k such that some kept set S of n - k points has
//         || sum_{i in S, x_i != theta} u_i || <= k + #{i in S : x_i = theta}
//
// with u_i = (theta - x_i) / ||theta - x_i||. Dropping a point that already
// sits on theta never helps, so only the remaining points are candidates for
// removal. The sampler evaluates len on a lattice over B(0, R) and draws a
// node with probability proportional to exp(-epsilon len / 2).

#ifndef DPGM_INVERSE_SENSITIVITY_H_
#define DPGM_INVERSE_SENSITIVITY_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgm/geometry.h"
#include "dpgm/privacy.h"

namespace dpgm {

enum class LenMode {
  // Exact minimum. Closed form in one dimension; subset enumeration
  // otherwise, limited to n <= 14.
  kExact,
  // Repeatedly drops the point that most reduces the residual; an upper
  // bound on the exact value.
  kGreedy,
};

inline constexpr int kMaxExactLenPoints = 14;

struct LenValue {
  // In [0, ceil(n / 2)]; the bound is always attained since keeping n - k <= k
  // points leaves a residual of at most k.
  int value = 0;
};

struct LenOptions {
  LenMode mode = LenMode::kExact;
  // Absolute slack added to the optimality test, scaled by n.
  double slack_per_point = 1e-7;
};

absl::StatusOr<LenValue> LenAt(const Dataset& data, const Vector& theta,
                               const LenOptions& options = {});

struct GridSpec {
  double R = 1.0;
  double spacing = 0.05;
  int d = 1;

  absl::Status Validate() const;
};

// Lattice points spacing * z, z integer, with norm at most R.
absl::StatusOr<std::vector<Vector>> GridNodes(const GridSpec& grid);

struct LenTable {
  std::vector<Vector> nodes;
  std::vector<int> lens;
  std::vector<double> probabilities;
  LenMode mode = LenMode::kExact;
};

// Evaluates len on every node and normalizes exp(-epsilon len / 2). Uses the
// exact mode when d = 1 or n <= 14 and the greedy bound otherwise.
absl::StatusOr<LenTable> BuildLenTable(const Dataset& data, double epsilon,
                                       const GridSpec& grid);

struct SinvsResult {
  Vector theta;
  int node = -1;
  LenTable table;
};

// Requires grid.spacing <= r, grid.d = data.d() <= 2 and grid.R = R.
absl::StatusOr<SinvsResult> SinvsSample(const Dataset& data, double epsilon,
                                        double r, double R,
                                        const GridSpec& grid, Rng& rng);

// Draws another node from an already-built table.
absl::StatusOr<int> SampleLenTable(const LenTable& table, double epsilon,
                                   Rng& rng);

// Columns: node index, coordinates x0..x{d-1}, len, probability.
absl::Status WriteLenTableCsv(const LenTable& table, const std::string& path);

// 2 F(theta0) / (n - 2k) with theta0 the Weiszfeld geometric median. Fails
// unless 0 <= k < n / 2.
absl::StatusOr<double> KStabilityBound(const Dataset& data, int k);

// floor((2 / epsilon) (ln(1 / beta) + d ln(R / r))).
int SinvsKStar(double epsilon, double beta, int d, double R, double r);

}  // namespace dpgm

#endif  // DPGM_INVERSE_SENSITIVITY_H_
