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

#include "dpgm/privacy.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include "absl/strings/str_format.h"

namespace dpgm {
namespace {

constexpr uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

uint64_t Mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
uint64_t HashName(std::string_view name) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::atomic<bool> noise_disabled{false};

}  // namespace

absl::StatusOr<ZcdpBudget> ZcdpBudget::Create(double rho) {
  if (!std::isfinite(rho) || rho <= 0.0) {
    return absl::InvalidArgumentError("rho must be finite and positive.");
  }
  return ZcdpBudget{rho};
}

absl::StatusOr<ApproxDpBudget> ApproxDpBudget::Create(double epsilon,
                                                      double delta) {
  if (!std::isfinite(epsilon) || epsilon <= 0.0) {
    return absl::InvalidArgumentError("Epsilon must be finite and positive.");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return absl::InvalidArgumentError("Delta must lie in (0, 1).");
  }
  return ApproxDpBudget{epsilon, delta};
}

ZcdpBudget ZcdpFromApproxDp(const ApproxDpBudget& budget) {
  const double eps = budget.epsilon;
  return ZcdpBudget{eps * eps / (4.0 * std::log(1.0 / budget.delta) + 4.0 * eps)};
}

double EpsilonFromZcdp(double rho, double delta) {
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

absl::StatusOr<ZcdpBudget> ComposeZcdp(std::span<const ZcdpBudget> budgets) {
  if (budgets.empty()) {
    return absl::InvalidArgumentError("Cannot compose an empty budget list.");
  }
  double total = 0.0;
  for (const ZcdpBudget& b : budgets) total += b.rho;
  return ZcdpBudget{total};
}

double BudgetLedger::Total() const {
  double total = 0.0;
  for (const BudgetEntry& e : entries_) total += e.rho;
  return total;
}

double BudgetLedger::Spent() const {
  double total = 0.0;
  for (const BudgetEntry& e : entries_) {
    if (e.spent) total += e.rho;
  }
  return total;
}

Rng::Rng(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream), key_(Mix64(seed ^ Mix64(stream + kGoldenGamma))) {}

Rng::result_type Rng::operator()() {
  return Mix64(key_ + (++counter_) * kGoldenGamma);
}

double Rng::UniformOpen() {
  // 53 random bits, shifted half a step away from zero.
  return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

Rng Rng::Fork(std::string_view name, uint64_t index) const {
  return Rng(seed_, Mix64(stream_ ^ Mix64(HashName(name) + index)));
}

namespace testing {

bool NoiseDisabled() { return noise_disabled.load(std::memory_order_relaxed); }

ScopedNoiseDisabled::ScopedNoiseDisabled()
    : previous_(noise_disabled.exchange(true)) {}

ScopedNoiseDisabled::~ScopedNoiseDisabled() { noise_disabled.store(previous_); }

}  // namespace testing

absl::StatusOr<Eigen::VectorXd> GaussianVector(double sigma, int dim,
                                               Rng& rng) {
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    return absl::InvalidArgumentError("sigma must be finite and positive.");
  }
  if (dim <= 0) return absl::InvalidArgumentError("dim must be positive.");
  if (testing::NoiseDisabled()) return Eigen::VectorXd::Zero(dim);
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::VectorXd out(dim);
  for (int i = 0; i < dim; ++i) out[i] = normal(rng);
  return out;
}

double LaplaceFromUniform(double scale, double u) {
  // Inverse CDF of Laplace(0, scale).
  if (u < 0.5) return scale * std::log(2.0 * u);
  return -scale * std::log(2.0 * (1.0 - u));
}

absl::StatusOr<double> LaplaceScalar(double scale, Rng& rng) {
  if (!std::isfinite(scale) || scale <= 0.0) {
    return absl::InvalidArgumentError("scale must be finite and positive.");
  }
  if (testing::NoiseDisabled()) return 0.0;
  return LaplaceFromUniform(scale, rng.UniformOpen());
}

absl::StatusOr<std::optional<int>> AboveThreshold(
    std::span<const double> queries, const ZcdpBudget& budget,
    double threshold, Rng& rng) {
  if (!std::isfinite(budget.rho) || budget.rho <= 0.0) {
    return absl::InvalidArgumentError("rho must be finite and positive.");
  }
  const double base = std::sqrt(2.0 * budget.rho);
  absl::StatusOr<double> threshold_noise = LaplaceScalar(6.0 / base, rng);
  if (!threshold_noise.ok()) return threshold_noise.status();
  const double noisy_threshold = threshold + *threshold_noise;
  for (size_t i = 0; i < queries.size(); ++i) {
    absl::StatusOr<double> noise = LaplaceScalar(12.0 / base, rng);
    if (!noise.ok()) return noise.status();
    if (queries[i] + *noise > noisy_threshold) return static_cast<int>(i);
  }
  return std::optional<int>();
}

std::vector<double> NormalizeLogWeights(std::span<const double> log_weights) {
  std::vector<double> probs(log_weights.begin(), log_weights.end());
  if (probs.empty()) return probs;
  const double top = *std::max_element(probs.begin(), probs.end());
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(p - top);
    total += p;
  }
  for (double& p : probs) p /= total;
  return probs;
}

absl::StatusOr<int> SampleFromLogWeights(std::span<const double> log_weights,
                                         Rng& rng) {
  if (log_weights.empty()) {
    return absl::InvalidArgumentError("Cannot sample from an empty set.");
  }
  for (double w : log_weights) {
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      return absl::InvalidArgumentError("Log-weights must not be NaN or +inf.");
    }
  }
  if (testing::NoiseDisabled()) {
    return static_cast<int>(
        std::max_element(log_weights.begin(), log_weights.end()) -
        log_weights.begin());
  }
  const std::vector<double> probs = NormalizeLogWeights(log_weights);
  double u = rng.UniformOpen();
  for (size_t i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  // Rounding left a sliver of mass past the end; give it to the last index
  // with positive probability.
  for (size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace dpgm
