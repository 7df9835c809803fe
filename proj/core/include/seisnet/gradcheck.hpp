/*
 * Copyright 2026 The SeisNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seisnet {

/// Step for central differences in double precision.
inline constexpr double kFiniteDifferenceStep = 1e-5;
/// Gradients smaller than this are compared on an absolute scale.
inline constexpr double kRelativeErrorFloor = 1e-4;

/// |a - b| / max(|a|, |b|, kRelativeErrorFloor)
double relative_error(double analytic, double numeric);

struct GradGroupResult {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  std::string layer;
  double tolerance = 0.0;
  std::size_t trials = 0;
  std::vector<GradGroupResult> groups;

  double max_relative_error() const;
  bool passed() const { return max_relative_error() < tolerance; }
  /// One line per group, e.g. "conv1d/kernel max_rel=3.1e-09 (n=72)".
  std::string summary() const;
};

/**
 * Fingerprint of the activation pattern (e.g. which ReLU inputs are positive)
 * seen by the most recent loss() call. A central difference is only trusted
 * when both ends of the step see the same pattern.
 */
using PatternProbe = std::function<std::uint64_t()>;

/// Tenfold step reductions tried when a step crosses a kink.
inline constexpr int kMaxStepReductions = 4;

/**
 * Compares `analytic` against central differences of `loss` with respect to
 * `values`, perturbing each entry in place and restoring it afterwards. With a
 * probe, a step whose ends see a different pattern is shrunk tenfold (at most
 * kMaxStepReductions times) so that no kink lies inside it.
 */
GradGroupResult finite_difference_check(const std::string& name,
                                        const std::function<double()>& loss,
                                        std::span<double> values,
                                        std::span<const double> analytic,
                                        double step = kFiniteDifferenceStep,
                                        const PatternProbe& pattern = {});

/// Central difference along `directions` random unit directions in the space
/// of `values`, compared with analytic . direction.
GradGroupResult directional_derivative_check(const std::string& name,
                                             const std::function<double()>& loss,
                                             std::span<double> values,
                                             std::span<const double> analytic,
                                             std::size_t directions, std::uint64_t seed,
                                             double step = kFiniteDifferenceStep,
                                             const PatternProbe& pattern = {});

/// Folds `result` into the report, keeping the worst error per group name.
void merge_group(GradCheckReport& report, const GradGroupResult& result);

enum class LayerKind { Conv1d, AvgPool1d, BatchNorm, Relu, Linear, Concat };

std::string to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(const std::string& name);
std::vector<LayerKind> all_layer_kinds();

/**
 * Runs `trial_count` randomized double-precision instances of one layer and
 * checks every backward output (input gradient and each parameter group)
 * against finite differences of the scalar loss sum(r * forward(x)) with a
 * random fixed r. Trial 0 of Conv1d is the L=11, K=3, 2->3 channel case.
 */
GradCheckReport check_gradients(LayerKind layer, std::size_t trial_count, double tolerance,
                                std::uint64_t seed = 1);

}  // namespace seisnet
