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

#include "flashcue/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flashcue/checksum.hpp"
#include "flashcue/dataset.hpp"
#include "flashcue/error.hpp"
#include "flashcue/estimator.hpp"
#include "flashcue/evaluate.hpp"
#include "flashcue/flash_only.hpp"
#include "flashcue/io.hpp"
#include "flashcue/isp.hpp"
#include "flashcue/parallel.hpp"
#include "flashcue/pipeline.hpp"
#include "flashcue/synth.hpp"

namespace flashcue {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { quiet, info, debug };

struct Logger {
  std::ostream* err = nullptr;
  LogLevel level = LogLevel::info;
  std::mutex mu;

  void info(const std::string& msg) { emit(LogLevel::info, msg); }
  void debug(const std::string& msg) { emit(LogLevel::debug, msg); }
  void error(const std::string& msg) {
    std::lock_guard lock(mu);
    *err << "flashcue: error: " << msg << '\n';
  }

 private:
  void emit(LogLevel l, const std::string& msg) {
    if (static_cast<int>(level) < static_cast<int>(l)) return;
    std::lock_guard lock(mu);
    *err << "flashcue: " << msg << '\n';
  }
};

struct Globals {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string log_level = "info";
};

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what(), e.byte);
  }
}

void write_json_file(const fs::path& p, const json& j) {
  const std::string text = j.dump(2) + "\n";
  io::write_bytes(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

bool has_ext(const fs::path& p, std::string_view ext) { return p.extension() == ext; }

/// Linear image from disk: LFR1 as stored, Netpbm gamma-decoded.
LinearImage read_linear(const fs::path& p) {
  if (has_ext(p, ".lfr")) return io::read_lfr(p);
  return gamma_decode(io::read_ppm(p));
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw ConfigError("size must be WxH, got '" + s + "'");
  try {
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw ConfigError("size must be WxH, got '" + s + "'");
  }
}

std::vector<Channel> parse_channels(const std::string& list) {
  std::vector<Channel> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_channel(item));
  return out;
}

json channels_json(const std::vector<Channel>& cs) {
  json a = json::array();
  for (auto c : cs) a.push_back(std::string(to_string(c)));
  return a;
}

// ---------------------------------------------------------------- isp

struct IspArgs {
  std::string in, out, stage_set = "full", config, gamma;
  int bits = 8;
};

int cmd_isp(const IspArgs& a, std::ostream& out, Logger& log) {
  const RawFrame frame = io::read_raw_frame(a.in);
  IspConfig cfg = IspConfig::from_meta(frame.meta);
  if (!a.config.empty()) cfg = isp_config_from_json(read_json_file(a.config), cfg);
  cfg.stage_set = parse_stage_set(a.stage_set);
  if (!a.gamma.empty()) {
    if (a.gamma == "srgb") cfg.gamma = Gamma::srgb;
    else if (a.gamma == "none") cfg.gamma = Gamma::none;
    else throw ConfigError("unknown gamma '" + a.gamma + "'");
  }
  cfg.validate();
  const ImageF rgb = run_isp(frame, cfg);
  if (has_ext(a.out, ".lfr")) {
    io::write_lfr(a.out, rgb);
  } else {
    io::write_ppm(a.out, quantize(rgb, a.bits));
  }
  log.info("isp: wrote " + a.out);
  out << json{{"command", "isp"}, {"input", a.in}, {"output", a.out}, {"isp", to_json(cfg)}, {"bits", a.bits}}.dump(2)
      << '\n';
  return kExitOk;
}

// ---------------------------------------------------------- flashonly

struct FlashOnlyArgs {
  std::string ambient, flash, out, mask, rgb_out;
  bool signed_mode = false;
  double margin = 0.02;
  int bits = 8;
};

int cmd_flashonly(const FlashOnlyArgs& a, std::ostream& out, Logger& log) {
  const RawFrame amb = io::read_raw_frame(a.ambient);
  const RawFrame fl = io::read_raw_frame(a.flash);
  FlashOnlyOptions opts;
  opts.signed_mode = a.signed_mode;
  opts.saturation_margin = a.margin;
  const FlashOnlyResult fo = compute_flash_only(amb, fl, opts);
  io::write_lfr(a.out, fo.image);
  if (!a.mask.empty()) io::write_mask(a.mask, fo.saturated);
  if (!a.rgb_out.empty()) io::write_ppm(a.rgb_out, quantize(flash_only_to_rgb(fo.image, amb.cfa, amb.meta), a.bits));
  const Eigen::Index sat = mask_count(fo.saturated);
  log.info("flashonly: exposure ratio " + std::to_string(fo.exposure_ratio) + ", " + std::to_string(sat) +
           " saturated, " + std::to_string(fo.clamped) + " clamped");
  json j = {{"command", "flashonly"},
            {"ambient", a.ambient},
            {"flash", a.flash},
            {"output", a.out},
            {"signed", a.signed_mode},
            {"saturation_margin", a.margin},
            {"exposure_ratio", fo.exposure_ratio},
            {"saturated_pixels", sat},
            {"clamped_samples", fo.clamped},
            {"sha256", sha256_file(a.out)}};
  if (!a.mask.empty()) j["mask"] = a.mask;
  if (!a.rgb_out.empty()) j["rgb_output"] = a.rgb_out;
  out << j.dump(2) << '\n';
  return kExitOk;
}

// -------------------------------------------------------------- synth

struct SynthArgs {
  std::string manifest, recipe, mode, size = "128x96", out;
  int procedural = 0;
  std::optional<double> max_disp;
  bool resize_half = false;
};

int cmd_synth(const SynthArgs& a, const Globals& g, Logger& log) {
  SynthRecipe recipe;
  if (!a.recipe.empty()) recipe = recipe_from_json(read_json_file(a.recipe));
  if (!a.mode.empty()) recipe.misalign_mode = parse_misalign_mode(a.mode);
  if (g.seed) recipe.seed = *g.seed;
  if (a.max_disp) recipe.homography_max_disp = *a.max_disp;
  if (a.resize_half) recipe.resize_half = true;
  recipe.validate();

  const fs::path out_dir = a.out;
  SourceManifest sources;
  if (!a.manifest.empty()) {
    if (a.procedural > 0) throw ConfigError("--manifest and --procedural are exclusive");
    sources = read_source_manifest(a.manifest);
  } else if (a.procedural > 0) {
    const auto [w, h] = parse_size(a.size);
    sources = write_procedural_sources(out_dir / "sources", a.procedural, w, h, derive_seed(recipe.seed, 0xC0FFEE));
  } else {
    throw ConfigError("synth needs --manifest or --procedural");
  }
  const unsigned threads = resolve_threads(g.threads);
  log.info("synth: " + std::to_string(sources.sources.size()) + " sources, mode " +
           std::string(to_string(recipe.misalign_mode)) + ", " + std::to_string(threads) + " threads");
  const DatasetManifest m = emit_dataset(sources, recipe, out_dir, threads);
  json cfg = {{"command", "synth"}, {"recipe", to_json(recipe)}, {"samples", m.samples.size()}};
  if (!a.manifest.empty()) cfg["manifest"] = a.manifest;
  else cfg["procedural"] = {{"count", a.procedural}, {"size", a.size}};
  write_json_file(out_dir / "config.json", cfg);
  log.info("synth: wrote " + std::to_string(m.samples.size()) + " samples to " + a.out);
  return kExitOk;
}

// -------------------------------------------------------------- align

struct AlignArgs {
  std::string ambient, flash, method = "homography", flow, flow_estimator, out;
  double threshold = 1.5;
  int iterations = 1000;
  int timeout_ms = 60000;
};

AlignSpec make_align_spec(const std::string& method, const std::string& flow_path, const std::string& flow_est,
                          const Globals& g, double threshold, int iterations, const fs::path& work_dir,
                          int timeout_ms, bool per_sample_flow = false) {
  AlignSpec spec;
  spec.method = parse_align_method(method);
  spec.ransac.seed = g.seed.value_or(0);
  spec.ransac.threads = resolve_threads(g.threads);
  spec.ransac.inlier_threshold_px = threshold;
  spec.ransac.iterations = iterations;
  spec.matching.threads = spec.ransac.threads;
  if (!flow_path.empty()) spec.flow = read_flow(flow_path);
  if (!flow_est.empty()) {
    spec.flow_estimator = estimator_from_spec(flow_est, EstimatorRole::flow, {}, work_dir / "flow",
                                              std::chrono::milliseconds(timeout_ms));
  }
  if (spec.method == AlignMethod::external_flow && !spec.flow && !spec.flow_estimator && !per_sample_flow) {
    throw ConfigError("--method external needs --flow or --flow-estimator");
  }
  return spec;
}

json align_spec_json(const AlignSpec& s, const std::string& flow_path) {
  json j = {{"method", std::string(to_string(s.method))}};
  if (s.method == AlignMethod::homography) {
    j["ransac"] = {{"inlier_threshold_px", s.ransac.inlier_threshold_px},
                   {"iterations", s.ransac.iterations},
                   {"seed", s.ransac.seed}};
    j["matching"] = {{"grid_step", s.matching.grid_step},
                     {"patch", s.matching.patch},
                     {"search_radius", s.matching.search_radius},
                     {"min_score", s.matching.min_score}};
  }
  if (!flow_path.empty()) j["flow"] = flow_path;
  if (s.flow_estimator) j["flow_estimator"] = s.flow_estimator->name;
  return j;
}

int cmd_align(const AlignArgs& a, const Globals& g, Logger& log) {
  const fs::path out_dir = a.out;
  const LinearImage amb = read_linear(a.ambient);
  const LinearImage fl = read_linear(a.flash);
  const AlignSpec spec =
      make_align_spec(a.method, a.flow, a.flow_estimator, g, a.threshold, a.iterations, out_dir / "work", a.timeout_ms);
  const AlignResult r = align_preprocess(amb, fl, spec);
  io::write_lfr(out_dir / "warped_flash.lfr", r.warped_flash);
  write_flow(out_dir / "flow.lfr", r.flow);
  io::write_mask(out_dir / "valid.pgm", r.valid);
  json cfg = {{"command", "align"}, {"ambient", a.ambient}, {"flash", a.flash}, {"align", align_spec_json(spec, a.flow)}};
  if (r.homography) cfg["homography"] = to_json(*r.homography);
  write_json_file(out_dir / "config.json", cfg);
  log.info("align: " + std::string(to_string(spec.method)) + ", " + std::to_string(mask_count(r.valid)) +
           " valid pixels");
  return kExitOk;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string ambient, flash, dataset, out;
  double ambient_ms = 1, flash_ms = 1;
  std::string g_r = "builtin:zero", g_t = "builtin:difference", g_b = "builtin:ambient";
  std::string g_r_inputs, g_t_inputs, g_b_inputs;
  std::string mode = "two-stage", base_variant = "flash_only_input";
  std::string align = "identity", flow, flow_estimator, space = "srgb";
  bool signed_mode = false, trace = true;
  double margin = 0.02;
  int timeout_ms = 60000;
};

struct RunSetup {
  bool two_stage = true;
  BaseVariant variant = BaseVariant::flash_only_input;
  PipelineOptions opts;
  std::optional<Estimator> g_r, g_t, g_b;
};

PipelineResult run_one(const RunSetup& s, const PipelineInput& input, const PipelineOptions& opts) {
  if (s.two_stage) return run_two_stage(input, *s.g_r, *s.g_t, opts);
  return run_base(input, *s.g_b, s.variant, opts);
}

int cmd_run(const RunArgs& a, const Globals& g, Logger& log) {
  const fs::path out_dir = a.out;
  const fs::path work = out_dir / "work";
  const auto timeout = std::chrono::milliseconds(a.timeout_ms);
  RunSetup s;
  if (a.mode == "two-stage" || a.mode == "two_stage") s.two_stage = true;
  else if (a.mode == "base") s.two_stage = false;
  else throw ConfigError("unknown mode '" + a.mode + "'");
  s.variant = parse_base_variant(a.base_variant);
  s.opts.space = a.space == "linear" ? EstimatorSpace::linear : EstimatorSpace::srgb;
  if (a.space != "linear" && a.space != "srgb") throw ConfigError("unknown space '" + a.space + "'");
  s.opts.flash_only.signed_mode = a.signed_mode;
  s.opts.flash_only.saturation_margin = a.margin;
  s.opts.align = make_align_spec(a.align, a.dataset.empty() ? a.flow : "", a.flow_estimator, g, 1.5, 1000, work,
                                 a.timeout_ms, !a.dataset.empty());

  json est = json::object();
  if (s.two_stage) {
    s.g_r = estimator_from_spec(a.g_r, EstimatorRole::reflection, parse_channels(a.g_r_inputs), work / "g_r", timeout);
    s.g_t = estimator_from_spec(a.g_t, EstimatorRole::transmission, parse_channels(a.g_t_inputs), work / "g_t", timeout);
    // Contract checks happen before any input is read.
    validate_two_stage(*s.g_r, *s.g_t);
    est["g_r"] = {{"spec", a.g_r}, {"inputs", channels_json(s.g_r->inputs)}};
    est["g_t"] = {{"spec", a.g_t}, {"inputs", channels_json(s.g_t->inputs)}};
  } else {
    std::vector<Channel> in = parse_channels(a.g_b_inputs);
    if (in.empty()) {
      in = {Channel::ambient, s.variant == BaseVariant::flash_only_input ? Channel::flash_only : Channel::flash};
    }
    s.g_b = estimator_from_spec(a.g_b, EstimatorRole::base, in, work / "g_b", timeout);
    validate_base(*s.g_b, s.variant);
    est["g_b"] = {{"spec", a.g_b}, {"inputs", channels_json(s.g_b->inputs)}};
  }

  json cfg = {{"command", "run"},
              {"mode", s.two_stage ? "two-stage" : "base"},
              {"space", a.space},
              {"estimators", est},
              {"flash_only", {{"signed", a.signed_mode}, {"saturation_margin", a.margin}}},
              {"align", align_spec_json(s.opts.align, a.flow)}};
  if (!s.two_stage) cfg["base_variant"] = a.base_variant;

  if (!a.dataset.empty()) {
    const DatasetManifest m = read_dataset_manifest(a.dataset);
    const fs::path ds_dir = fs::path(a.dataset).parent_path();
    const unsigned threads = resolve_threads(g.threads);
    cfg["dataset"] = a.dataset;
    log.info("run: " + std::to_string(m.samples.size()) + " samples, " + std::to_string(threads) + " threads");
    parallel_for(m.samples.size(), threads, [&](std::size_t i) {
      const DatasetSample& d = m.samples[i];
      auto file = [&](const char* role) {
        const auto it = d.files.find(role);
        if (it == d.files.end()) throw DataError("sample '" + d.id + "' has no " + role);
        return ds_dir / it->second;
      };
      LinearPair pair{io::read_lfr(file("ambient")), io::read_lfr(file("flash")), 1.0, 1.0};
      PipelineOptions opts = s.opts;
      if (opts.align.method == AlignMethod::external_flow && !opts.align.flow_estimator) {
        opts.align.flow = read_flow(file("flow_t"));
      }
      const PipelineResult r = run_one(s, pair, opts);
      const LinearImage t = r.space == EstimatorSpace::srgb ? gamma_decode_float(r.t_hat) : r.t_hat;
      io::write_lfr(out_dir / (d.id + ".lfr"), t);
      if (a.trace) write_json_file(out_dir / "traces" / (d.id + ".json"), to_json(r.trace));
      log.debug("run: " + d.id + " done");
    });
    cfg["samples"] = m.samples.size();
    write_json_file(out_dir / "config.json", cfg);
    return kExitOk;
  }

  if (a.ambient.empty() || a.flash.empty()) throw ConfigError("run needs --ambient and --flash, or --dataset");
  PipelineInput input;
  if (has_ext(a.ambient, ".pgm")) {
    input = RawPair{io::read_raw_frame(a.ambient), io::read_raw_frame(a.flash)};
  } else {
    input = LinearPair{read_linear(a.ambient), read_linear(a.flash), a.ambient_ms, a.flash_ms};
    cfg["exposure_ms"] = {{"ambient", a.ambient_ms}, {"flash", a.flash_ms}};
  }
  cfg["ambient"] = a.ambient;
  cfg["flash"] = a.flash;
  const PipelineResult r = run_one(s, input, s.opts);
  io::write_lfr(out_dir / "t_hat.lfr", r.t_hat);
  if (s.two_stage) io::write_lfr(out_dir / "r_hat.lfr", r.r_hat);
  if (!r.flash_only.empty()) io::write_lfr(out_dir / "flash_only.lfr", r.flash_only);
  io::write_mask(out_dir / "valid.pgm", r.valid);
  if (a.trace) write_json_file(out_dir / "trace.json", to_json(r.trace));
  write_json_file(out_dir / "config.json", cfg);
  log.info("run: wrote outputs to " + a.out);
  return kExitOk;
}

// ----------------------------------------------------------- evaluate

struct EvalArgs {
  std::string manifest, pred, out, space = "srgb";
  int crop = 0;
  bool table = false, no_validity = false;
};

int cmd_evaluate(const EvalArgs& a, const Globals& g, std::ostream& out, Logger& log) {
  const DatasetManifest m = read_dataset_manifest(a.manifest);
  EvalOptions opts;
  opts.border_crop = a.crop;
  if (a.space == "linear") opts.space = MetricSpace::linear;
  else if (a.space != "srgb") throw ConfigError("unknown space '" + a.space + "'");
  opts.use_validity = !a.no_validity;
  opts.threads = resolve_threads(g.threads);
  const EvalReport report = evaluate_manifest(m, fs::path(a.manifest).parent_path(), a.pred, opts);
  write_json_file(a.out, to_json(report, {{"generated_utc", utc_timestamp()},
                                          {"manifest", a.manifest},
                                          {"predictions", a.pred}}));
  if (a.table) out << to_table(report);
  log.info("evaluate: " + std::to_string(report.rows.size()) + " samples, mean PSNR " +
           std::to_string(report.mean_psnr_db) + " dB, mean SSIM " + std::to_string(report.mean_ssim));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"flash/no-flash reflection removal toolkit", "flashcue"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed for every random choice");
  app.add_option("--threads", g.threads, "Worker threads for batch work (0 = all cores)");
  app.add_option("--log-level", g.log_level, "quiet, info or debug")->check(CLI::IsMember({"quiet", "info", "debug"}));

  IspArgs isp;
  auto* c_isp = app.add_subcommand("isp", "Render a raw frame through the ISP");
  c_isp->add_option("--in", isp.in, "Raw PGM with .meta.json sidecar")->required();
  c_isp->add_option("--out", isp.out, "Output .ppm or .lfr")->required();
  c_isp->add_option("--stage-set", isp.stage_set, "full or linear");
  c_isp->add_option("--config", isp.config, "IspConfig JSON (flags win)");
  c_isp->add_option("--gamma", isp.gamma, "srgb or none");
  c_isp->add_option("--bits", isp.bits, "PPM depth")->check(CLI::IsMember({8, 16}));

  FlashOnlyArgs fo;
  auto* c_fo = app.add_subcommand("flashonly", "Exposure-compensated flash-only image from a raw pair");
  c_fo->alias("compute");
  c_fo->add_option("--ambient", fo.ambient, "Ambient raw PGM")->required();
  c_fo->add_option("--flash", fo.flash, "Flash raw PGM")->required();
  c_fo->add_option("--out", fo.out, "Output LFR1 mosaic")->required();
  c_fo->add_option("--mask", fo.mask, "Saturation mask PGM");
  c_fo->add_flag("--signed", fo.signed_mode, "Keep negative residuals");
  c_fo->add_option("--rgb-out", fo.rgb_out, "Rendered flash-only PPM");
  c_fo->add_option("--margin", fo.margin, "Saturation margin");
  c_fo->add_option("--bits", fo.bits, "PPM depth")->check(CLI::IsMember({8, 16}));

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "Synthesize a training/evaluation dataset");
  c_sy->add_option("--manifest", sy.manifest, "Source manifest JSON");
  c_sy->add_option("--procedural", sy.procedural, "Generate N procedural sources instead");
  c_sy->add_option("--size", sy.size, "Procedural source size WxH");
  c_sy->add_option("--recipe", sy.recipe, "SynthRecipe JSON (flags win)");
  c_sy->add_option("--mode", sy.mode, "none, homography or depth");
  c_sy->add_option("--max-disp", sy.max_disp, "Homography corner displacement bound in px");
  c_sy->add_flag("--resize-half", sy.resize_half, "Halve sources before cropping");
  c_sy->add_option("--out", sy.out, "Output directory")->required();

  AlignArgs al;
  auto* c_al = app.add_subcommand("align", "Align a flash image onto an ambient image");
  c_al->add_option("--ambient", al.ambient, "Ambient .lfr or .ppm")->required();
  c_al->add_option("--flash", al.flash, "Flash .lfr or .ppm")->required();
  c_al->add_option("--method", al.method, "identity, homography or external");
  c_al->add_option("--flow", al.flow, "Ambient->flash flow LFR1 for external");
  c_al->add_option("--flow-estimator", al.flow_estimator, "Flow estimator (cmd:COMMAND or @FILE)");
  c_al->add_option("--threshold", al.threshold, "RANSAC inlier threshold in px");
  c_al->add_option("--iterations", al.iterations, "RANSAC iterations");
  c_al->add_option("--timeout-ms", al.timeout_ms, "External estimator timeout");
  c_al->add_option("--out", al.out, "Output directory")->required();

  RunArgs ru;
  auto* c_ru = app.add_subcommand("run", "Run the reflection-removal pipeline");
  c_ru->add_option("--ambient", ru.ambient, "Ambient raw .pgm, .lfr or .ppm");
  c_ru->add_option("--flash", ru.flash, "Flash raw .pgm, .lfr or .ppm");
  c_ru->add_option("--ambient-ms", ru.ambient_ms, "Ambient exposure for non-raw input");
  c_ru->add_option("--flash-ms", ru.flash_ms, "Flash exposure for non-raw input");
  c_ru->add_option("--dataset", ru.dataset, "Run on every sample of a dataset manifest");
  c_ru->add_option("--mode", ru.mode, "two-stage or base");
  c_ru->add_option("--base-variant", ru.base_variant, "flash-only, flash or linear");
  c_ru->add_option("--g-r", ru.g_r, "Reflection estimator (builtin:NAME, cmd:COMMAND or @FILE)");
  c_ru->add_option("--g-t", ru.g_t, "Transmission estimator (builtin:NAME, cmd:COMMAND or @FILE)");
  c_ru->add_option("--g-b", ru.g_b, "Base estimator (builtin:NAME, cmd:COMMAND or @FILE)");
  c_ru->add_option("--g-r-inputs", ru.g_r_inputs, "Override declared g_R channels (comma list)");
  c_ru->add_option("--g-t-inputs", ru.g_t_inputs, "Override declared g_T channels (comma list)");
  c_ru->add_option("--g-b-inputs", ru.g_b_inputs, "Override declared g_B channels (comma list)");
  c_ru->add_option("--align", ru.align, "identity, homography or external");
  c_ru->add_option("--flow", ru.flow, "Ambient->flash flow LFR1 for external alignment");
  c_ru->add_option("--flow-estimator", ru.flow_estimator, "Flow estimator for external alignment (builtin:NAME, cmd:COMMAND or @FILE)");
  c_ru->add_option("--space", ru.space, "Estimator space: srgb or linear");
  c_ru->add_flag("--signed", ru.signed_mode, "Keep negative flash-only residuals");
  c_ru->add_option("--margin", ru.margin, "Saturation margin");
  c_ru->add_flag("--trace,!--no-trace", ru.trace, "Write the stage trace");
  c_ru->add_option("--timeout-ms", ru.timeout_ms, "External estimator timeout");
  c_ru->add_option("--out", ru.out, "Output directory")->required();

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score predictions against dataset ground truth");
  c_ev->add_option("--manifest", ev.manifest, "Dataset manifest.json")->required();
  c_ev->add_option("--pred", ev.pred, "Directory of <id>.lfr or <id>.ppm predictions")->required();
  c_ev->add_option("--out", ev.out, "Report JSON")->required();
  c_ev->add_option("--crop", ev.crop, "Border crop in px");
  c_ev->add_option("--space", ev.space, "Metric space: srgb or linear");
  c_ev->add_flag("--table", ev.table, "Print a plain-text table");
  c_ev->add_flag("--no-validity", ev.no_validity, "Ignore validity masks");

  auto* c_fmt = app.add_subcommand("formats", "Describe the on-disk formats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  Logger log;
  log.err = &err;
  log.level = g.log_level == "quiet" ? LogLevel::quiet : g.log_level == "debug" ? LogLevel::debug : LogLevel::info;

  try {
    if (c_isp->parsed()) return cmd_isp(isp, out, log);
    if (c_fo->parsed()) return cmd_flashonly(fo, out, log);
    if (c_sy->parsed()) return cmd_synth(sy, g, log);
    if (c_al->parsed()) return cmd_align(al, g, log);
    if (c_ru->parsed()) return cmd_run(ru, g, log);
    if (c_ev->parsed()) return cmd_evaluate(ev, g, out, log);
    if (c_fmt->parsed()) {
      out << io::format_description();
      return kExitOk;
    }
  } catch (const ContractViolation& e) {
    log.error(e.what());
    return kExitContract;
  } catch (const ConfigError& e) {
    log.error(e.what());
    err << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    log.error(e.what());
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace flashcue
