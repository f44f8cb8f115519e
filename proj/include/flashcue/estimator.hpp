// Copyright 2026 The flashcue Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flashcue/image.hpp"

namespace flashcue {

enum class EstimatorRole { reflection, transmission, base, flow };

/// Image channels an estimator may declare as inputs.
enum class Channel { ambient, flash, flash_only, flash_only_gray, reflection_estimate };

std::string_view to_string(EstimatorRole r);
std::string_view to_string(Channel c);
EstimatorRole parse_role(std::string_view s);
Channel parse_channel(std::string_view s);

using EstimatorFn = std::function<ImageF(std::span<const ImageF> inputs)>;

/// A pluggable stage. `inputs` is the declared channel list; the pipeline
/// checks it against the wiring contract before any pixel work and then
/// supplies exactly those channels, in that order.
struct Estimator {
  std::string name;
  EstimatorRole role = EstimatorRole::transmission;
  std::vector<Channel> inputs;
  EstimatorFn invoke;
};

/// Canonical declared inputs for a role.
std::vector<Channel> default_inputs(EstimatorRole role);

/// Always returns zeros shaped like the first input.
Estimator zero_estimator(EstimatorRole role, std::vector<Channel> inputs);
/// Returns a copy of the first input.
Estimator passthrough_estimator(EstimatorRole role, std::vector<Channel> inputs);
/// Returns first - second.
Estimator difference_estimator(EstimatorRole role, std::vector<Channel> inputs);

struct ExternalEstimatorConfig {
  /// argv prefix; the orchestrator appends --role, --in <paths...>, --out <path>.
  std::vector<std::string> command;
  std::chrono::milliseconds timeout{60000};
  /// Scratch directory for exchanged LFR1 files.
  std::filesystem::path work_dir;
  bool keep_files = false;
};

/// Runs an external process per invocation. Inputs are written as LFR1,
/// a JSON control record {role, inputs: [{channel, path}], out} is fed on
/// standard input, and the LFR1 at `--out` is read back. Nonzero exit,
/// timeout or a missing result raise StageFailure.
Estimator external_estimator(std::string name, EstimatorRole role, std::vector<Channel> inputs,
                             ExternalEstimatorConfig cfg);

/// Parses an estimator description:
///   builtin:zero | builtin:ambient | builtin:difference
///   cmd:<program> [args...]            (whitespace separated)
///   @<file.json>  {"command": [...], "inputs": [...], "timeout_ms": n}
/// `inputs` overrides the declared channels when non-empty.
Estimator estimator_from_spec(std::string_view spec, EstimatorRole role,
                              const std::vector<Channel>& inputs,
                              const std::filesystem::path& work_dir,
                              std::chrono::milliseconds timeout);

struct ProcessResult {
  int exit_code = 0;
  bool timed_out = false;
  std::string stdout_text;
};

/// Runs argv with `stdin_text` on standard input, capturing standard output.
/// Kills the child after `timeout`.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_text,
                          std::chrono::milliseconds timeout, const std::filesystem::path& scratch);

}  // namespace flashcue
