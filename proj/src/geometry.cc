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

#include "dpgm/geometry.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"

namespace dpgm {
namespace {

absl::Status CheckDimension(const Vector& theta, const Dataset& data) {
  if (theta.size() != data.d()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("Dimension mismatch: theta has %d coordinates, data "
                        "has dimension %d.",
                        theta.size(), data.d()));
  }
  if (!theta.allFinite()) {
    return absl::InvalidArgumentError("theta must be finite.");
  }
  return absl::OkStatus();
}

// Residual of the non-coincident unit vectors and the number of data points
// exactly equal to theta.
struct Residual {
  Vector sum;
  int coincident = 0;
};

Residual ResidualAt(const Vector& theta, const Dataset& data) {
  Residual out{Vector::Zero(data.d()), 0};
  for (int i = 0; i < data.n(); ++i) {
    Vector diff = theta - data.point(i);
    const double dist = diff.norm();
    if (dist == 0.0) {
      ++out.coincident;
    } else {
      out.sum += diff / dist;
    }
  }
  return out;
}

}  // namespace

absl::StatusOr<Dataset> Dataset::FromRows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) {
    return absl::InvalidArgumentError("Dataset must contain at least one point.");
  }
  const size_t d = rows.front().size();
  if (d == 0) {
    return absl::InvalidArgumentError("Points must have positive dimension.");
  }
  Eigen::MatrixXd points(d, rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "Row %d has %d coordinates, expected %d.", i, rows[i].size(), d));
    }
    for (size_t j = 0; j < d; ++j) points(j, i) = rows[i][j];
  }
  return FromMatrix(std::move(points));
}

absl::StatusOr<Dataset> Dataset::FromMatrix(Eigen::MatrixXd points) {
  if (points.cols() == 0 || points.rows() == 0) {
    return absl::InvalidArgumentError("Dataset must be non-empty.");
  }
  if (!points.allFinite()) {
    return absl::InvalidArgumentError("Dataset coordinates must be finite.");
  }
  return Dataset(std::move(points));
}

Dataset Dataset::WithReplaced(int i, const Vector& replacement) const {
  Dataset copy = *this;
  copy.points_.col(i) = replacement;
  return copy;
}

double GmObjectiveUnchecked(const Vector& theta, const Dataset& data) {
  return (data.points().colwise() - theta).colwise().norm().sum();
}

Vector GmSubgradientUnchecked(const Vector& theta, const Dataset& data) {
  return ResidualAt(theta, data).sum;
}

absl::StatusOr<double> GmObjective(const Vector& theta, const Dataset& data) {
  if (auto status = CheckDimension(theta, data); !status.ok()) return status;
  return GmObjectiveUnchecked(theta, data);
}

absl::StatusOr<Vector> GmSubgradient(const Vector& theta, const Dataset& data) {
  if (auto status = CheckDimension(theta, data); !status.ok()) return status;
  return GmSubgradientUnchecked(theta, data);
}

double GmStationarityGap(const Vector& theta, const Dataset& data) {
  const Residual res = ResidualAt(theta, data);
  return std::max(0.0, res.sum.norm() - res.coincident);
}

absl::StatusOr<double> QuantileRadius(const Dataset& data, const Vector& theta,
                                      double gamma) {
  if (auto status = CheckDimension(theta, data); !status.ok()) return status;
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError("gamma must lie in (0, 1].");
  }
  Eigen::VectorXd dist = (data.points().colwise() - theta).colwise().norm();
  std::vector<double> sorted(dist.data(), dist.data() + dist.size());
  // Guard against gamma * n landing a hair above an integer.
  const double target = gamma * data.n();
  int m = static_cast<int>(std::ceil(target - 1e-9));
  m = std::clamp(m, 1, data.n());
  std::nth_element(sorted.begin(), sorted.begin() + (m - 1), sorted.end());
  return sorted[m - 1];
}

WeiszfeldResult RunWeiszfeld(const Dataset& data, double tol, int max_iter) {
  const int n = data.n();
  const double target = tol * n;
  WeiszfeldResult best;
  best.theta = data.points().rowwise().mean();
  best.gap = GmStationarityGap(best.theta, data);

  Vector theta = best.theta;
  for (int iter = 0; iter < max_iter; ++iter) {
    best.iterations = iter;
    Eigen::RowVectorXd dist = (data.points().colwise() - theta).colwise().norm();

    Vector residual = Vector::Zero(data.d());
    Vector weighted = Vector::Zero(data.d());
    double weight_sum = 0.0;
    int coincident = 0;
    int nearest = 0;
    for (int i = 0; i < n; ++i) {
      if (dist[i] < dist[nearest]) nearest = i;
      if (dist[i] == 0.0) {
        ++coincident;
        continue;
      }
      const double w = 1.0 / dist[i];
      residual += (theta - data.point(i)) * w;
      weighted += data.point(i) * w;
      weight_sum += w;
    }

    const double gap = std::max(0.0, residual.norm() - coincident);
    if (gap < best.gap) {
      best.gap = gap;
      best.theta = theta;
    }
    if (gap <= target) {
      best.converged = true;
      return best;
    }

    // Iterates approach a data-point minimizer without reaching it; test the
    // nearest point directly once we are close.
    const double scale = dist.mean();
    if (coincident == 0 && dist[nearest] <= 1e-4 * scale) {
      Vector snapped = data.point(nearest);
      const double snapped_gap = GmStationarityGap(snapped, data);
      if (snapped_gap <= target) {
        best.theta = snapped;
        best.gap = snapped_gap;
        best.converged = true;
        return best;
      }
    }

    if (weight_sum == 0.0) {
      // Every point coincides with theta, which is then optimal.
      best.theta = theta;
      best.gap = 0.0;
      best.converged = true;
      return best;
    }
    if (coincident > 0) {
      // Non-optimal data point: step along the descent direction -residual.
      theta -= tol * residual.normalized();
      continue;
    }
    theta = weighted / weight_sum;
  }
  best.iterations = max_iter;
  return best;
}

absl::StatusOr<Vector> WeiszfeldGm(const Dataset& data, double tol,
                                   int max_iter) {
  if (!(tol > 0.0)) return absl::InvalidArgumentError("tol must be positive.");
  if (max_iter <= 0) {
    return absl::InvalidArgumentError("max_iter must be positive.");
  }
  WeiszfeldResult result = RunWeiszfeld(data, tol, max_iter);
  if (!result.converged) {
    return absl::ResourceExhaustedError(absl::StrFormat(
        "Weiszfeld did not reach gap %g after %d iterations; best gap %g.",
        tol * data.n(), max_iter, result.gap));
  }
  return result.theta;
}

Vector ProjectBall(const Vector& point, const Ball& ball) {
  Vector diff = point - ball.center;
  const double dist = diff.norm();
  if (dist <= ball.radius) return point;
  return ball.center + diff * (ball.radius / dist);
}

absl::StatusOr<Vector> ProjectBallIntersection(const Vector& point,
                                               const Ball& outer,
                                               const Ball& inner, double tol) {
  if (point.size() != outer.center.size() ||
      point.size() != inner.center.size()) {
    return absl::InvalidArgumentError("Dimension mismatch in projection.");
  }
  if (outer.radius < 0.0 || inner.radius < 0.0) {
    return absl::InvalidArgumentError("Ball radius must be non-negative.");
  }
  const double gap = (outer.center - inner.center).norm();
  if (gap > outer.radius + inner.radius) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "Balls do not intersect: centers %g apart, radii %g and %g.", gap,
        outer.radius, inner.radius));
  }
  if (outer.Contains(point) && inner.Contains(point)) return point;
  // Nested cases reduce to a single projection.
  Vector candidate = ProjectBall(point, inner);
  if (outer.Contains(candidate, tol)) return candidate;
  candidate = ProjectBall(point, outer);
  if (inner.Contains(candidate, tol)) return candidate;

  Vector x = point;
  Vector p = Vector::Zero(point.size());
  Vector q = Vector::Zero(point.size());
  for (int sweep = 0; sweep < 1000; ++sweep) {
    Vector y = ProjectBall(x + p, outer);
    p = x + p - y;
    Vector next = ProjectBall(y + q, inner);
    q = y + q - next;
    const double change = (next - x).norm();
    x = std::move(next);
    if (change <= tol && outer.Contains(x, tol)) break;
  }
  return x;
}

absl::StatusOr<Dataset> LoadDatasetCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrFormat("Cannot open %s.", path));
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    std::vector<double> row;
    for (absl::string_view field : absl::StrSplit(view, ',')) {
      double value;
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(field), &value)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("%s:%d: cannot parse '%s' as a number.", path,
                            line_no, std::string(field)));
      }
      row.push_back(value);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      return absl::InvalidArgumentError(
          absl::StrFormat("%s:%d: ragged row with %d fields, expected %d.",
                          path, line_no, row.size(), rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  return Dataset::FromRows(rows);
}

absl::Status WriteDatasetCsv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    return absl::UnavailableError(absl::StrFormat("Cannot write %s.", path));
  }
  for (int i = 0; i < data.n(); ++i) {
    for (int j = 0; j < data.d(); ++j) {
      if (j > 0) out << ',';
      out << absl::StrFormat("%.17g", data.points()(j, i));
    }
    out << '\n';
  }
  if (!out) return absl::UnavailableError("Write failed.");
  return absl::OkStatus();
}

}  // namespace dpgm
