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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seisnet/detect.hpp"

namespace seisnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitFailure = 2;

/// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes detections.csv, metrics.csv (with a report) and, when `plot_traces`
/// is non-empty, plot_<trace id>.csv for each of them into `dir`.
std::vector<std::filesystem::path> emit_report(const std::optional<EvalReport>& report,
                                               const std::vector<Detection>& detections,
                                               const std::vector<const Trace*>& plot_traces,
                                               const std::filesystem::path& dir);

/// --threads, else SEISNET_THREADS, else the hardware concurrency (at least 1).
std::size_t resolve_threads(std::optional<std::size_t> flag);

}  // namespace seisnet::cli
