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

#ifndef DPGM_GEOMETRY_H_
#define DPGM_GEOMETRY_H_

#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace dpgm {

using Vector = Eigen::VectorXd;

// An ordered collection of n points in R^d. Points are stored as the columns
// of a d x n matrix so that each point is contiguous in memory.
class Dataset {
 public:
  // Fails if `rows` is empty, a row is empty, rows have different lengths or
  // any coordinate is not finite.
  static absl::StatusOr<Dataset> FromRows(
      const std::vector<std::vector<double>>& rows);
  static absl::StatusOr<Dataset> FromMatrix(Eigen::MatrixXd points);

  int n() const { return static_cast<int>(points_.cols()); }
  int d() const { return static_cast<int>(points_.rows()); }
  const Eigen::MatrixXd& points() const { return points_; }
  auto point(int i) const { return points_.col(i); }

  // Returns a copy with point i replaced by `replacement`.
  Dataset WithReplaced(int i, const Vector& replacement) const;

 private:
  explicit Dataset(Eigen::MatrixXd points) : points_(std::move(points)) {}

  Eigen::MatrixXd points_;
};

// Closed Euclidean ball.
struct Ball {
  Vector center;
  double radius = 0.0;

  bool Contains(const Vector& x, double tol = 0.0) const {
    return (x - center).norm() <= radius + tol;
  }
};

// F(theta) = sum_i ||theta - x_i||.
absl::StatusOr<double> GmObjective(const Vector& theta, const Dataset& data);

// Sum of unit vectors (theta - x_i) / ||theta - x_i||; points equal to theta
// contribute zero.
absl::StatusOr<Vector> GmSubgradient(const Vector& theta, const Dataset& data);

// Unchecked variants used in inner loops where dimensions are already known
// to agree.
double GmObjectiveUnchecked(const Vector& theta, const Dataset& data);
Vector GmSubgradientUnchecked(const Vector& theta, const Dataset& data);

// Distance from the origin to the subdifferential of F at theta. Points
// coinciding with theta contribute a unit ball each, so this is
// max(0, ||residual|| - multiplicity).
double GmStationarityGap(const Vector& theta, const Dataset& data);

// The ceil(gamma * n)-th smallest distance from theta to the data.
absl::StatusOr<double> QuantileRadius(const Dataset& data, const Vector& theta,
                                      double gamma);

struct WeiszfeldResult {
  Vector theta;
  // GmStationarityGap at theta.
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Weiszfeld iteration started from the coordinate-wise mean. Stops once the
// stationarity gap is at most tol * n. When an iterate lands on a data point
// that is not optimal, the iterate is moved a distance tol along the descent
// direction given by the residual.
WeiszfeldResult RunWeiszfeld(const Dataset& data, double tol, int max_iter);

// As RunWeiszfeld, but returns a ResourceExhausted error naming the best gap
// when max_iter is reached without convergence.
absl::StatusOr<Vector> WeiszfeldGm(const Dataset& data, double tol = 1e-10,
                                   int max_iter = 100000);

// Euclidean projection onto a single ball.
Vector ProjectBall(const Vector& point, const Ball& ball);

// Euclidean projection onto outer ∩ inner using Dykstra's alternating
// projections (at most 1000 sweeps). Fails if the balls do not intersect.
absl::StatusOr<Vector> ProjectBallIntersection(const Vector& point,
                                               const Ball& outer,
                                               const Ball& inner,
                                               double tol = 1e-9);

// Reads one point per line, comma separated, no header. Ragged rows and
// non-numeric fields are rejected.
absl::StatusOr<Dataset> LoadDatasetCsv(const std::string& path);
absl::Status WriteDatasetCsv(const Dataset& data, const std::string& path);

}  // namespace dpgm

#endif  // DPGM_GEOMETRY_H_
