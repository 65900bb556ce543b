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

#ifndef DPGM_PRIVACY_H_
#define DPGM_PRIVACY_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"

namespace dpgm {

// rho-zCDP.
struct ZcdpBudget {
  double rho = 0.0;

  static absl::StatusOr<ZcdpBudget> Create(double rho);
};

// (epsilon, delta)-DP under single-point replacement.
struct ApproxDpBudget {
  double epsilon = 0.0;
  double delta = 0.0;

  static absl::StatusOr<ApproxDpBudget> Create(double epsilon, double delta);
};

// rho = eps^2 / (4 ln(1/delta) + 4 eps). A mechanism satisfying this rho-zCDP
// is (eps, delta)-DP.
ZcdpBudget ZcdpFromApproxDp(const ApproxDpBudget& budget);

// eps = rho + 2 sqrt(rho ln(1/delta)). Accepts rho = 0.
double EpsilonFromZcdp(double rho, double delta);

// zCDP composes additively. Fails on an empty list.
absl::StatusOr<ZcdpBudget> ComposeZcdp(std::span<const ZcdpBudget> budgets);

// Allocation ledger. Every stage of an algorithm records the share of the
// budget it was allocated; stages skipped because of an early halt are
// recorded with spent = false so that the ledger still sums to the input.
struct BudgetEntry {
  std::string stage;
  double rho = 0.0;
  bool spent = true;
};

class BudgetLedger {
 public:
  void Record(std::string stage, double rho, bool spent = true) {
    entries_.push_back({std::move(stage), rho, spent});
  }
  void Append(const BudgetLedger& other) {
    entries_.insert(entries_.end(), other.entries_.begin(),
                    other.entries_.end());
  }
  double Total() const;
  double Spent() const;
  const std::vector<BudgetEntry>& entries() const { return entries_; }

 private:
  std::vector<BudgetEntry> entries_;
};

// Counter-based generator: the k-th output is a SplitMix64 finalization of
// key + k * golden_gamma, where the key is derived from (seed, stream). Child
// streams are derived by name and index so that every (stage, iteration)
// draws from its own independent sequence regardless of execution order.
class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t seed, uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()();

  // Uniform on the open interval (0, 1).
  double UniformOpen();

  Rng Fork(std::string_view name, uint64_t index = 0) const;

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t key_;
  uint64_t counter_ = 0;
};

// Test hook. While a ScopedNoiseDisabled is alive every randomized operation
// in the library behaves as its noiseless counterpart: samplers return zero,
// exponential-mechanism style selectors return the highest-scoring index.
// Nothing outside test code constructs one.
namespace testing {

bool NoiseDisabled();

class ScopedNoiseDisabled {
 public:
  ScopedNoiseDisabled();
  ~ScopedNoiseDisabled();
  ScopedNoiseDisabled(const ScopedNoiseDisabled&) = delete;
  ScopedNoiseDisabled& operator=(const ScopedNoiseDisabled&) = delete;

 private:
  bool previous_;
};

}  // namespace testing

// i.i.d. N(0, sigma^2) coordinates.
absl::StatusOr<Eigen::VectorXd> GaussianVector(double sigma, int dim, Rng& rng);

// Laplace(0, scale) by inverse CDF of a single uniform draw.
absl::StatusOr<double> LaplaceScalar(double scale, Rng& rng);

// Laplace(0, scale) from a given uniform u in (0, 1).
double LaplaceFromUniform(double scale, double u);

// Sparse-vector AboveThreshold for a sensitivity-3 query family under
// rho-zCDP: threshold noise Lap(6 / sqrt(2 rho)), per-query noise
// Lap(12 / sqrt(2 rho)). Returns the first index whose noisy value exceeds
// the noisy threshold, or nullopt.
absl::StatusOr<std::optional<int>> AboveThreshold(std::span<const double> queries,
                                                  const ZcdpBudget& budget,
                                                  double threshold, Rng& rng);

// Draws an index with probability proportional to exp(log_weights[i]) using a
// max-shifted normalization. With noise disabled returns the first argmax.
absl::StatusOr<int> SampleFromLogWeights(std::span<const double> log_weights,
                                         Rng& rng);

// The normalized probabilities SampleFromLogWeights samples from.
std::vector<double> NormalizeLogWeights(std::span<const double> log_weights);

}  // namespace dpgm

#endif  // DPGM_PRIVACY_H_
