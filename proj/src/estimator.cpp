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

#include "flashcue/estimator.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include <atomic>
#include <memory>
#include <sstream>
#include <thread>

#include "flashcue/io.hpp"

namespace flashcue {

namespace fs = std::filesystem;

std::string_view to_string(EstimatorRole r) {
  switch (r) {
    case EstimatorRole::reflection: return "reflection";
    case EstimatorRole::transmission: return "transmission";
    case EstimatorRole::base: return "base";
    case EstimatorRole::flow: return "flow";
  }
  return "?";
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::ambient: return "ambient";
    case Channel::flash: return "flash";
    case Channel::flash_only: return "flash_only";
    case Channel::flash_only_gray: return "flash_only_gray";
    case Channel::reflection_estimate: return "reflection_estimate";
  }
  return "?";
}

EstimatorRole parse_role(std::string_view s) {
  for (auto r : {EstimatorRole::reflection, EstimatorRole::transmission, EstimatorRole::base, EstimatorRole::flow})
    if (to_string(r) == s) return r;
  throw ConfigError("unknown estimator role '" + std::string(s) + "'");
}

Channel parse_channel(std::string_view s) {
  for (auto c : {Channel::ambient, Channel::flash, Channel::flash_only, Channel::flash_only_gray,
                 Channel::reflection_estimate})
    if (to_string(c) == s) return c;
  throw ConfigError("unknown channel '" + std::string(s) + "'");
}

std::vector<Channel> default_inputs(EstimatorRole role) {
  switch (role) {
    case EstimatorRole::reflection: return {Channel::ambient, Channel::flash_only_gray};
    case EstimatorRole::transmission: return {Channel::ambient, Channel::reflection_estimate};
    case EstimatorRole::base: return {Channel::ambient, Channel::flash_only};
    case EstimatorRole::flow: return {Channel::ambient, Channel::flash};
  }
  return {};
}

Estimator zero_estimator(EstimatorRole role, std::vector<Channel> inputs) {
  return {"builtin:zero", role, std::move(inputs), [](std::span<const ImageF> in) {
            if (in.empty()) throw ContractViolation("builtin:zero needs an input");
            return ImageF(in[0].width(), in[0].height(), in[0].channels());
          }};
}

Estimator passthrough_estimator(EstimatorRole role, std::vector<Channel> inputs) {
  return {"builtin:ambient", role, std::move(inputs), [](std::span<const ImageF> in) {
            if (in.empty()) throw ContractViolation("builtin:ambient needs an input");
            return in[0];
          }};
}

Estimator difference_estimator(EstimatorRole role, std::vector<Channel> inputs) {
  return {"builtin:difference", role, std::move(inputs), [](std::span<const ImageF> in) {
            if (in.size() < 2) throw ContractViolation("builtin:difference needs two inputs");
            require_same_shape(in[0], in[1], "builtin:difference");
            ImageF out = in[0];
            out.array() -= in[1].array();
            return out;
          }};
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& stdin_text,
                          std::chrono::milliseconds timeout, const fs::path& scratch) {
  if (argv.empty()) throw ConfigError("empty command");
  fs::create_directories(scratch);
  const fs::path in_path = scratch / "control.json";
  const fs::path out_path = scratch / "stdout.txt";
  io::write_bytes(in_path, std::span(reinterpret_cast<const std::uint8_t*>(stdin_text.data()), stdin_text.size()));

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  const pid_t pid = fork();
  if (pid < 0) throw StageFailure("fork failed");
  if (pid == 0) {
    const int in_fd = open(in_path.c_str(), O_RDONLY);
    const int out_fd = open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (in_fd < 0 || out_fd < 0) _exit(126);
    dup2(in_fd, STDIN_FILENO);
    dup2(out_fd, STDOUT_FILENO);
    close(in_fd);
    close(out_fd);
    execvp(args[0], args.data());
    _exit(127);
  }
  ProcessResult r;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int status = 0;
  for (;;) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) throw StageFailure("waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      r.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (!r.timed_out) r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  if (fs::exists(out_path)) {
    const auto bytes = io::read_bytes(out_path);
    r.stdout_text.assign(bytes.begin(), bytes.end());
  }
  return r;
}

Estimator external_estimator(std::string name, EstimatorRole role, std::vector<Channel> inputs,
                             ExternalEstimatorConfig cfg) {
  if (cfg.command.empty()) throw ConfigError("external estimator '" + name + "' has no command");
  auto counter = std::make_shared<std::atomic<int>>(0);
  const std::vector<Channel> declared = inputs;
  EstimatorFn fn = [name, role, declared, cfg, counter](std::span<const ImageF> in) {
    if (in.size() != declared.size()) {
      throw ContractViolation("external estimator '" + name + "' received " + std::to_string(in.size()) +
                              " inputs, declared " + std::to_string(declared.size()));
    }
    const fs::path dir = cfg.work_dir / (std::string(to_string(role)) + "_" + std::to_string((*counter)++));
    fs::create_directories(dir);
    std::vector<std::string> argv = cfg.command;
    argv.insert(argv.end(), {"--role", std::string(to_string(role)), "--in"});
    nlohmann::json control = {{"role", std::string(to_string(role))}, {"inputs", nlohmann::json::array()}};
    for (std::size_t i = 0; i < in.size(); ++i) {
      const fs::path p = dir / (std::string(to_string(declared[i])) + ".lfr");
      io::write_lfr(p, in[i]);
      argv.push_back(p.string());
      control["inputs"].push_back({{"channel", std::string(to_string(declared[i]))}, {"path", p.string()}});
    }
    const fs::path out = dir / "out.lfr";
    argv.insert(argv.end(), {"--out", out.string()});
    control["out"] = out.string();
    const ProcessResult pr = run_process(argv, control.dump() + "\n", cfg.timeout, dir / "io");
    if (pr.timed_out) {
      throw StageFailure("estimator '" + name + "' timed out after " + std::to_string(cfg.timeout.count()) + " ms");
    }
    if (pr.exit_code != 0) {
      throw StageFailure("estimator '" + name + "' exited with status " + std::to_string(pr.exit_code));
    }
    if (!fs::exists(out)) throw StageFailure("estimator '" + name + "' produced no output");
    ImageF result = io::read_lfr(out);
    if (!cfg.keep_files) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
    return result;
  };
  return {std::move(name), role, std::move(inputs), std::move(fn)};
}

Estimator estimator_from_spec(std::string_view spec, EstimatorRole role, const std::vector<Channel>& inputs,
                              const fs::path& work_dir, std::chrono::milliseconds timeout) {
  std::vector<Channel> declared = inputs.empty() ? default_inputs(role) : inputs;
  if (spec == "builtin:zero") return zero_estimator(role, declared);
  if (spec == "builtin:ambient") return passthrough_estimator(role, declared);
  if (spec == "builtin:difference") return difference_estimator(role, declared);
  ExternalEstimatorConfig cfg;
  cfg.work_dir = work_dir;
  cfg.timeout = timeout;
  if (spec.starts_with("cmd:")) {
    std::istringstream words{std::string(spec.substr(4))};
    for (std::string w; words >> w;) cfg.command.push_back(w);
  } else if (spec.starts_with("@")) {
    const fs::path path{std::string(spec.substr(1))};
    const auto bytes = io::read_bytes(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes.begin(), bytes.end());
      cfg.command = j.at("command").get<std::vector<std::string>>();
      if (j.contains("timeout_ms")) cfg.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long>());
      if (inputs.empty() && j.contains("inputs")) {
        declared.clear();
        for (const auto& c : j.at("inputs")) declared.push_back(parse_channel(c.get<std::string>()));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("estimator file '" + path.string() + "': " + e.what());
    }
  } else {
    throw ConfigError("unknown estimator spec '" + std::string(spec) + "'");
  }
  return external_estimator(std::string(spec), role, std::move(declared), std::move(cfg));
}

}  // namespace flashcue
