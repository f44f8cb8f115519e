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

#include "flashcue/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "flashcue/isp.hpp"
#include "flashcue/metrics.hpp"

namespace flashcue {

AlignMethod parse_align_method(std::string_view s) {
  if (s == "identity") return AlignMethod::identity;
  if (s == "homography") return AlignMethod::homography;
  if (s == "external" || s == "external_flow") return AlignMethod::external_flow;
  throw ConfigError("unknown alignment method '" + std::string(s) + "'");
}

std::string_view to_string(AlignMethod m) {
  switch (m) {
    case AlignMethod::identity: return "identity";
    case AlignMethod::homography: return "homography";
    case AlignMethod::external_flow: return "external_flow";
  }
  return "?";
}

BaseVariant parse_base_variant(std::string_view s) {
  if (s == "flash_only_input" || s == "flash-only") return BaseVariant::flash_only_input;
  if (s == "flash_input" || s == "flash") return BaseVariant::flash_input;
  if (s == "linear_space" || s == "linear") return BaseVariant::linear_space;
  throw ConfigError("unknown base variant '" + std::string(s) + "'");
}

const StageRecord* StageTrace::find(std::string_view stage) const {
  for (const auto& s : stages)
    if (s.stage == stage) return &s;
  return nullptr;
}

nlohmann::json to_json(const StageTrace& trace) {
  nlohmann::json stages = nlohmann::json::array();
  nlohmann::json timing = nlohmann::json::array();
  for (const auto& s : trace.stages) {
    nlohmann::json j = {{"stage", s.stage}};
    if (!s.estimator.empty()) j["estimator"] = s.estimator;
    if (s.role) j["role"] = std::string(to_string(*s.role));
    if (s.role) {
      nlohmann::json in = nlohmann::json::array();
      for (auto c : s.inputs) in.push_back(std::string(to_string(c)));
      j["inputs"] = in;
    }
    stages.push_back(j);
    timing.push_back({{"stage", s.stage}, {"millis", s.millis}});
  }
  return {{"stages", stages}, {"meta", {{"timing", timing}}}};
}

double l2_loss(const ImageF& pred, const ImageF& target, const Mask* valid) {
  return mean_squared_error(pred, target, valid);
}

AlignResult align_preprocess(const ImageF& ambient, const ImageF& flash, const AlignSpec& spec) {
  require_same_shape(ambient, flash, "align_preprocess");
  const int w = ambient.width(), h = ambient.height();
  AlignResult r;
  switch (spec.method) {
    case AlignMethod::identity:
      r.warped_flash = flash;
      r.flow = FlowField(w, h);
      r.valid = full_mask(w, h, true);
      return r;
    case AlignMethod::homography: {
      const auto matches = find_correspondences(ambient, flash, spec.matching);
      const HomographyFit fit = estimate_homography(matches, HomographyMethod::ransac_dlt, spec.ransac);
      r.homography = fit.homography;
      r.flow = homography_to_flow(fit.homography, w, h);
      break;
    }
    case AlignMethod::external_flow: {
      if (spec.flow) {
        r.flow = *spec.flow;
      } else if (spec.flow_estimator) {
        const Estimator& est = *spec.flow_estimator;
        if (est.role != EstimatorRole::flow || est.inputs != default_inputs(EstimatorRole::flow)) {
          throw ContractViolation("flow estimator '" + est.name + "' must declare inputs {ambient, flash}");
        }
        const ImageF in[2] = {ambient, flash};
        r.flow = FlowField(est.invoke(in));
      } else {
        throw ConfigError("external_flow alignment needs a flow field or a flow estimator");
      }
      if (r.flow.width() != w || r.flow.height() != h) throw DataError("alignment flow: dimension mismatch");
      break;
    }
  }
  WarpResult warped = warp_by_flow(flash, r.flow, Boundary::zero);
  r.warped_flash = std::move(warped.image);
  r.valid = std::move(warped.valid);
  return r;
}

namespace {

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void require_unique(const Estimator& e) {
  for (std::size_t i = 0; i < e.inputs.size(); ++i)
    for (std::size_t j = i + 1; j < e.inputs.size(); ++j)
      if (e.inputs[i] == e.inputs[j]) {
        throw ContractViolation("estimator '" + e.name + "' declares channel '" +
                                std::string(to_string(e.inputs[i])) + "' twice");
      }
}

/// Declared inputs must equal `allowed` as a set.
void require_inputs(const Estimator& e, EstimatorRole role, const std::vector<Channel>& allowed,
                    const char* label) {
  if (e.role != role) {
    throw ContractViolation(std::string(label) + " estimator '" + e.name + "' has role '" +
                            std::string(to_string(e.role)) + "', expected '" + std::string(to_string(role)) + "'");
  }
  if (!e.invoke) throw ContractViolation(std::string(label) + " estimator '" + e.name + "' is not callable");
  require_unique(e);
  for (Channel c : e.inputs) {
    if (std::find(allowed.begin(), allowed.end(), c) == allowed.end()) {
      throw ContractViolation(std::string(label) + " estimator '" + e.name + "' declares forbidden input channel '" +
                              std::string(to_string(c)) + "'");
    }
  }
  for (Channel c : allowed) {
    if (std::find(e.inputs.begin(), e.inputs.end(), c) == e.inputs.end()) {
      throw ContractViolation(std::string(label) + " estimator '" + e.name + "' is missing input channel '" +
                              std::string(to_string(c)) + "'");
    }
  }
}

/// Linear RGB frames plus everything needed to reach estimator space.
struct Prepared {
  LinearImage ambient_lin;
  LinearImage flash_lin;  // after alignment
  double ambient_ms = 1, flash_ms = 1;
  Eigen::Matrix3d ccm = Eigen::Matrix3d::Identity();
  FlowField flow;
  Mask valid;
  const RawPair* raw = nullptr;
  bool raw_identity = false;
};

ImageF to_estimator_space(const LinearImage& lin, const Eigen::Matrix3d& ccm, EstimatorSpace space) {
  if (space == EstimatorSpace::linear) return lin;
  return gamma_encode_float(color_correct(lin, ccm));
}

Prepared prepare(const PipelineInput& input, const AlignSpec& align, StageTrace& trace) {
  Prepared p;
  auto t0 = Clock::now();
  if (const auto* raw = std::get_if<RawPair>(&input)) {
    require_same_extent(raw->ambient.samples, raw->flash.samples, "raw pair");
    if (raw->ambient.cfa != raw->flash.cfa) throw DataError("raw pair: CFA pattern mismatch");
    p.raw = raw;
    // Flash data goes through the ambient frame's linear stages (donor
    // metadata) so both sides stay in one linear space.
    const IspConfig lin_cfg = IspConfig::from_meta(raw->ambient.meta, StageSet::linear_only);
    p.ambient_lin = run_isp(raw->ambient, lin_cfg);
    p.flash_lin = run_isp(raw->flash, lin_cfg);
    p.ambient_ms = raw->ambient.meta.exposure_ms;
    p.flash_ms = raw->flash.meta.exposure_ms;
    p.ccm = IspConfig::from_meta(raw->ambient.meta).effective_ccm();
    trace.stages.push_back({"linear_isp", "", std::nullopt, {}, millis_since(t0)});
  } else {
    const auto& lp = std::get<LinearPair>(input);
    require_same_shape(lp.ambient, lp.flash, "linear pair");
    if (lp.ambient.channels() != 3) throw DataError("linear pair must be 3-channel RGB");
    p.ambient_lin = lp.ambient;
    p.flash_lin = lp.flash;
    p.ambient_ms = lp.ambient_ms;
    p.flash_ms = lp.flash_ms;
  }
  t0 = Clock::now();
  AlignResult al = align_preprocess(p.ambient_lin, p.flash_lin, align);
  p.flash_lin = std::move(al.warped_flash);
  p.flow = std::move(al.flow);
  p.valid = std::move(al.valid);
  p.raw_identity = p.raw && align.method == AlignMethod::identity;
  trace.stages.push_back({"align:" + std::string(to_string(align.method)), "", std::nullopt, {}, millis_since(t0)});
  return p;
}

/// Exposure-compensated flash-only image in linear space, then in estimator space.
void flash_only_stage(const Prepared& p, const PipelineOptions& opts, PipelineResult& r) {
  const auto t0 = Clock::now();
  if (p.raw_identity) {
    // Subtraction on the raw mosaics followed by the ISP with the ambient
    // metadata, exactly as on an aligned capture.
    FlashOnlyResult fo = compute_flash_only(p.raw->ambient, p.raw->flash, opts.flash_only);
    r.flash_only = std::move(fo.image);
    r.saturated = std::move(fo.saturated);
    r.clamped = fo.clamped;
    r.flash_only_rgb = opts.space == EstimatorSpace::srgb
                           ? flash_only_to_rgb(r.flash_only, p.raw->ambient.cfa, p.raw->ambient.meta)
                           : run_isp_linear_mosaic(r.flash_only, p.raw->ambient.cfa,
                                                   IspConfig::from_meta(p.raw->ambient.meta, StageSet::linear_only));
  } else {
    FlashOnlyResult fo = compute_flash_only(p.ambient_lin, p.flash_lin, p.ambient_ms, p.flash_ms, opts.flash_only);
    r.flash_only = std::move(fo.image);
    r.saturated = std::move(fo.saturated);
    r.clamped = fo.clamped;
    r.flash_only_rgb = to_estimator_space(r.flash_only, p.ccm, opts.space);
  }
  r.trace.stages.push_back({"flash_only", "", std::nullopt, {}, millis_since(t0)});
  const auto t1 = Clock::now();
  r.flash_only_gray = to_grayscale(r.flash_only_rgb);
  r.trace.stages.push_back({"grayscale", "", std::nullopt, {}, millis_since(t1)});
}

ImageF ambient_in_space(const Prepared& p, EstimatorSpace space) {
  if (p.raw && space == EstimatorSpace::srgb) {
    return run_isp(p.raw->ambient, IspConfig::from_meta(p.raw->ambient.meta, StageSet::full));
  }
  return to_estimator_space(p.ambient_lin, p.ccm, space);
}

const ImageF& channel_image(Channel c, const PipelineResult& r, const ImageF* flash_est) {
  switch (c) {
    case Channel::ambient: return r.ambient;
    case Channel::flash_only: return r.flash_only_rgb;
    case Channel::flash_only_gray: return r.flash_only_gray;
    case Channel::reflection_estimate: return r.r_hat;
    case Channel::flash:
      if (!flash_est) break;
      return *flash_est;
  }
  throw ContractViolation("channel '" + std::string(to_string(c)) + "' is not available at this stage");
}

ImageF invoke(const Estimator& e, const char* stage, PipelineResult& r, const ImageF* flash_est = nullptr) {
  std::vector<ImageF> inputs;
  inputs.reserve(e.inputs.size());
  for (Channel c : e.inputs) inputs.push_back(channel_image(c, r, flash_est));
  const auto t0 = Clock::now();
  ImageF out = e.invoke(inputs);
  const double ms = millis_since(t0);
  if (!out.same_extent(r.ambient)) {
    throw ContractViolation(std::string(stage) + " estimator '" + e.name + "' returned " +
                            std::to_string(out.width()) + "x" + std::to_string(out.height()) + ", expected " +
                            std::to_string(r.ambient.width()) + "x" + std::to_string(r.ambient.height()));
  }
  if (!all_finite(out)) throw ContractViolation(std::string(stage) + " estimator '" + e.name + "' returned non-finite values");
  r.trace.stages.push_back({stage, e.name, e.role, e.inputs, ms});
  return out;
}

void adopt(Prepared& p, PipelineResult& r) {
  r.aligned_flash = p.flash_lin;
  r.flow = std::move(p.flow);
  r.valid = std::move(p.valid);
}

}  // namespace

void validate_two_stage(const Estimator& g_r, const Estimator& g_t) {
  require_inputs(g_r, EstimatorRole::reflection, {Channel::ambient, Channel::flash_only_gray}, "reflection");
  require_inputs(g_t, EstimatorRole::transmission, {Channel::ambient, Channel::reflection_estimate}, "transmission");
}

void validate_base(const Estimator& g_b, BaseVariant variant) {
  const Channel second = variant == BaseVariant::flash_only_input ? Channel::flash_only : Channel::flash;
  require_inputs(g_b, EstimatorRole::base, {Channel::ambient, second}, "base");
}

PipelineResult run_two_stage(const PipelineInput& input, const Estimator& g_r, const Estimator& g_t,
                             const PipelineOptions& opts) {
  validate_two_stage(g_r, g_t);
  PipelineResult r;
  r.space = opts.space;
  Prepared p = prepare(input, opts.align, r.trace);
  flash_only_stage(p, opts, r);
  r.ambient = ambient_in_space(p, opts.space);
  adopt(p, r);
  r.r_hat = invoke(g_r, "reflection", r);
  r.t_hat = invoke(g_t, "transmission", r);
  return r;
}

PipelineResult run_base(const PipelineInput& input, const Estimator& g_b, BaseVariant variant,
                        const PipelineOptions& opts) {
  validate_base(g_b, variant);
  PipelineResult r;
  r.space = variant == BaseVariant::linear_space ? EstimatorSpace::linear : opts.space;
  Prepared p = prepare(input, opts.align, r.trace);
  ImageF flash_est;
  if (variant == BaseVariant::flash_only_input) {
    flash_only_stage(p, opts, r);
    r.ambient = ambient_in_space(p, opts.space);
  } else if (variant == BaseVariant::flash_input) {
    r.ambient = ambient_in_space(p, opts.space);
    flash_est = to_estimator_space(p.flash_lin, p.ccm, opts.space);
  } else {
    r.ambient = p.ambient_lin;
    flash_est = p.flash_lin;
  }
  adopt(p, r);
  r.t_hat = invoke(g_b, "base", r, flash_est.empty() ? nullptr : &flash_est);
  return r;
}

}  // namespace flashcue
