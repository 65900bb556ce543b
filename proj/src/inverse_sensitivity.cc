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

#include "dpgm/inverse_sensitivity.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "absl/strings/str_format.h"

namespace dpgm {
namespace {

struct UnitVectors {
  std::vector<Vector> units;
  Vector total;
  int coincident = 0;
};

UnitVectors SplitAt(const Dataset& data, const Vector& theta) {
  UnitVectors out;
  out.total = Vector::Zero(data.d());
  const double eps = 1e-12 * (1.0 + theta.norm());
  for (int i = 0; i < data.n(); ++i) {
    Vector diff = theta - data.point(i);
    const double dist = diff.norm();
    if (dist <= eps) {
      ++out.coincident;
      continue;
    }
    diff /= dist;
    out.total += diff;
    out.units.push_back(std::move(diff));
  }
  return out;
}

int CeilHalf(int n) { return (n + 1) / 2; }

int LenOneDimensional(const Dataset& data, double theta) {
  const double eps = 1e-12 * (1.0 + std::abs(theta));
  int below = 0;
  int above = 0;
  int equal = 0;
  for (int i = 0; i < data.n(); ++i) {
    const double x = data.points()(0, i);
    if (std::abs(x - theta) <= eps) {
      ++equal;
    } else if (x < theta) {
      ++below;
    } else {
      ++above;
    }
  }
  // Each removal from the heavier side shrinks the imbalance by one and
  // grows the slack by one.
  const int excess = std::abs(below - above) - equal;
  return std::max(0, (excess + 1) / 2);
}

int LenByEnumeration(const UnitVectors& split, int n, double slack) {
  const int m = static_cast<int>(split.units.size());
  const int d = static_cast<int>(split.total.size());
  const uint32_t masks = 1u << m;
  std::vector<double> best(m + 1, std::numeric_limits<double>::infinity());
  Eigen::MatrixXd removed(d, masks);
  removed.col(0).setZero();
  best[0] = split.total.norm();
  for (uint32_t mask = 1; mask < masks; ++mask) {
    const int low = std::countr_zero(mask);
    removed.col(mask) = removed.col(mask & (mask - 1)) + split.units[low];
    const int k = std::popcount(mask);
    best[k] = std::min(best[k], (split.total - removed.col(mask)).norm());
  }
  for (int k = 0; k <= m; ++k) {
    if (best[k] <= k + split.coincident + slack) return k;
  }
  return std::min(m, CeilHalf(n));
}

int LenGreedy(const UnitVectors& split, int n, double slack) {
  Vector residual = split.total;
  std::vector<bool> dropped(split.units.size(), false);
  const int cap = CeilHalf(n);
  for (int k = 0; k <= cap; ++k) {
    if (residual.norm() <= k + split.coincident + slack) return k;
    int pick = -1;
    double pick_norm = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < split.units.size(); ++i) {
      if (dropped[i]) continue;
      const double norm = (residual - split.units[i]).norm();
      if (norm < pick_norm) {
        pick_norm = norm;
        pick = static_cast<int>(i);
      }
    }
    if (pick < 0) return k;
    dropped[pick] = true;
    residual -= split.units[pick];
  }
  return cap;
}

}  // namespace

absl::StatusOr<LenValue> LenAt(const Dataset& data, const Vector& theta,
                               const LenOptions& options) {
  if (theta.size() != data.d()) {
    return absl::InvalidArgumentError("theta dimension does not match data.");
  }
  const double slack = options.slack_per_point * data.n();
  if (options.mode == LenMode::kExact && data.d() == 1) {
    return LenValue{std::min(LenOneDimensional(data, theta[0]),
                             CeilHalf(data.n()))};
  }
  const UnitVectors split = SplitAt(data, theta);
  if (options.mode == LenMode::kGreedy) {
    return LenValue{LenGreedy(split, data.n(), slack)};
  }
  if (data.n() > kMaxExactLenPoints) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "Exact len enumeration is limited to n <= %d (got n = %d) for d > 1.",
        kMaxExactLenPoints, data.n()));
  }
  return LenValue{LenByEnumeration(split, data.n(), slack)};
}

absl::Status GridSpec::Validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) {
    return absl::InvalidArgumentError("Grid radius must be finite and > 0.");
  }
  if (!(spacing > 0.0)) {
    return absl::InvalidArgumentError("Grid spacing must be positive.");
  }
  if (d < 1 || d > 2) {
    return absl::InvalidArgumentError("Grids are supported for d in {1, 2}.");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Vector>> GridNodes(const GridSpec& grid) {
  if (auto status = grid.Validate(); !status.ok()) return status;
  const int steps = static_cast<int>(std::floor(grid.R / grid.spacing + 1e-9));
  const double limit = grid.R * (1.0 + 1e-12);
  std::vector<Vector> nodes;
  if (grid.d == 1) {
    for (int i = -steps; i <= steps; ++i) {
      nodes.push_back(Vector::Constant(1, i * grid.spacing));
    }
  } else {
    for (int i = -steps; i <= steps; ++i) {
      for (int j = -steps; j <= steps; ++j) {
        Vector node(2);
        node << i * grid.spacing, j * grid.spacing;
        if (node.norm() <= limit) nodes.push_back(std::move(node));
      }
    }
  }
  return nodes;
}

absl::StatusOr<LenTable> BuildLenTable(const Dataset& data, double epsilon,
                                       const GridSpec& grid) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    return absl::InvalidArgumentError("Epsilon must be finite and positive.");
  }
  if (grid.d != data.d()) {
    return absl::InvalidArgumentError("Grid dimension does not match data.");
  }
  absl::StatusOr<std::vector<Vector>> nodes = GridNodes(grid);
  if (!nodes.ok()) return nodes.status();
  if (nodes->empty()) return absl::InvalidArgumentError("Grid is empty.");

  LenTable table;
  table.mode = (data.d() == 1 || data.n() <= kMaxExactLenPoints)
                   ? LenMode::kExact
                   : LenMode::kGreedy;
  table.nodes = *std::move(nodes);
  std::vector<double> log_weights;
  log_weights.reserve(table.nodes.size());
  for (const Vector& node : table.nodes) {
    absl::StatusOr<LenValue> len = LenAt(data, node, {.mode = table.mode});
    if (!len.ok()) return len.status();
    table.lens.push_back(len->value);
    log_weights.push_back(-0.5 * epsilon * len->value);
  }
  table.probabilities = NormalizeLogWeights(log_weights);
  return table;
}

absl::StatusOr<int> SampleLenTable(const LenTable& table, double epsilon,
                                   Rng& rng) {
  std::vector<double> log_weights;
  log_weights.reserve(table.lens.size());
  for (int len : table.lens) log_weights.push_back(-0.5 * epsilon * len);
  return SampleFromLogWeights(log_weights, rng);
}

absl::StatusOr<SinvsResult> SinvsSample(const Dataset& data, double epsilon,
                                        double r, double R,
                                        const GridSpec& grid, Rng& rng) {
  if (!(r > 0.0)) return absl::InvalidArgumentError("r must be positive.");
  if (grid.spacing > r * (1.0 + 1e-12)) {
    return absl::InvalidArgumentError("Grid spacing must not exceed r.");
  }
  if (std::abs(grid.R - R) > 1e-12 * R) {
    return absl::InvalidArgumentError("Grid radius must equal R.");
  }
  absl::StatusOr<LenTable> table = BuildLenTable(data, epsilon, grid);
  if (!table.ok()) return table.status();
  absl::StatusOr<int> node = SampleLenTable(*table, epsilon, rng);
  if (!node.ok()) return node.status();
  SinvsResult result;
  result.node = *node;
  result.theta = table->nodes[*node];
  result.table = *std::move(table);
  return result;
}

absl::Status WriteLenTableCsv(const LenTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    return absl::UnavailableError(absl::StrFormat("Cannot write %s.", path));
  }
  const int d = table.nodes.empty() ? 0 : static_cast<int>(table.nodes[0].size());
  out << "node";
  for (int j = 0; j < d; ++j) out << ",x" << j;
  out << ",len,probability\n";
  for (size_t i = 0; i < table.nodes.size(); ++i) {
    out << i;
    for (int j = 0; j < d; ++j) out << absl::StrFormat(",%.12g", table.nodes[i][j]);
    out << ',' << table.lens[i]
        << absl::StrFormat(",%.12g\n", table.probabilities[i]);
  }
  if (!out) return absl::UnavailableError("Write failed.");
  return absl::OkStatus();
}

absl::StatusOr<double> KStabilityBound(const Dataset& data, int k) {
  if (k < 0 || 2 * k >= data.n()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("k = %d must satisfy 0 <= k < n / 2 = %g.", k,
                        data.n() / 2.0));
  }
  absl::StatusOr<Vector> theta0 = WeiszfeldGm(data);
  if (!theta0.ok()) return theta0.status();
  return 2.0 * GmObjectiveUnchecked(*theta0, data) / (data.n() - 2 * k);
}

int SinvsKStar(double epsilon, double beta, int d, double R, double r) {
  return static_cast<int>(
      std::floor((2.0 / epsilon) * (std::log(1.0 / beta) + d * std::log(R / r))));
}

}  // namespace dpgm
