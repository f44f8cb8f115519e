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

// Acceptance checks. One PASS/FAIL line per criterion; exits 1 if any fail.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flashcue/checksum.hpp"
#include "flashcue/flash_only.hpp"
#include "flashcue/geometry/depth.hpp"
#include "flashcue/geometry/flow.hpp"
#include "flashcue/geometry/homography.hpp"
#include "flashcue/io.hpp"
#include "flashcue/isp.hpp"
#include "flashcue/metrics.hpp"
#include "flashcue/pipeline.hpp"
#include "flashcue/random.hpp"
#include "flashcue/synth.hpp"

using namespace flashcue;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream note;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) note << what;
    ok = ok && cond;
  }
};

double max_abs(const ImageF& a, const ImageF& b) {
  if (!a.same_shape(b)) return INFINITY;
  return (a.array().cast<double>() - b.array().cast<double>()).abs().maxCoeff();
}

ImageF uniform_image(int w, int h, int c, std::uint64_t seed, float lo, float hi) {
  Rng rng(seed);
  ImageF img(w, h, c);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.array()[i] = static_cast<float>(rng.uniform(lo, hi));
  return img;
}

// Every stage trace seen in this binary must show g_T wired to {ambient, R_hat}.
int g_traces_checked = 0;
bool g_traces_ok = true;

void audit_trace(const StageTrace& trace) {
  const StageRecord* t = trace.find("transmission");
  if (!t) return;
  ++g_traces_checked;
  g_traces_ok = g_traces_ok && t->inputs == std::vector<Channel>{Channel::ambient, Channel::reflection_estimate};
}

PipelineResult traced(PipelineResult r) {
  audit_trace(r.trace);
  return r;
}

// ---------------------------------------------------------------- 1
Check flash_only_identity() {
  Check c;
  double worst_seconds = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    // A and F lie on a 2^-14 grid with A + F < 1, so the sum is exact in float.
    ImageF a = uniform_image(512, 512, 3, derive_seed(seed, 1), 0.0f, 0.5f);
    ImageF f = uniform_image(512, 512, 3, derive_seed(seed, 2), 0.0f, 0.45f);
    a.array() = (a.array() * 16384.0f).round() / 16384.0f;
    f.array() = (f.array() * 16384.0f).round() / 16384.0f;
    ImageF flash = a;
    flash.array() += f.array();
    const auto t0 = std::chrono::steady_clock::now();
    const FlashOnlyResult r = compute_flash_only(a, flash, 10, 10);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    worst_seconds = std::max(worst_seconds, secs);
    c.expect(max_abs(r.image, f) == 0.0, "float error nonzero at seed " + std::to_string(seed));
    if (seed < 10) {
      // 14-bit capture of unquantized values: at most one quantization step.
      const ImageF aq = uniform_image(512, 512, 1, derive_seed(seed, 3), 0.0f, 0.5f);
      const ImageF fq = uniform_image(512, 512, 1, derive_seed(seed, 4), 0.0f, 0.45f);
      ImageF sum = aq;
      sum.array() += fq.array();
      CaptureMeta m;
      m.set_black_level(0);
      m.white_level = 16383;
      m.exposure_ms = 10;
      const RawFrame ra = delinearize(aq, Cfa::RGGB, m).frame;
      const RawFrame rf = delinearize(sum, Cfa::RGGB, m).frame;
      const FlashOnlyResult q = compute_flash_only(ra, rf, {true});
      c.expect(max_abs(q.image, fq) <= 1.0 / 16383 + 1e-7, "14-bit round trip beyond one step");
    }
  }
  c.expect(worst_seconds < 1.0, "runtime over 1 s");
  c.note << (c.ok ? "" : "; ") << "worst " << worst_seconds * 1000 << " ms per 512x512 image";
  return c;
}

// ---------------------------------------------------------------- 2
Check exposure_compensation() {
  Check c;
  const ImageF a = uniform_image(128, 128, 3, 21, 0.0f, 0.4f);
  const ImageF f = uniform_image(128, 128, 3, 22, 0.2f, 0.9f);
  double worst = 0;
  for (auto [ea, ef] : std::vector<std::pair<double, double>>{{60, 40}, {10, 10}, {25, 50}}) {
    const FlashOnlyResult base = compute_flash_only(a, f, ea, ef, {true});
    for (double k : {0.5, 2.0 / 3.0, 2.0}) {
      ImageF ak = a;
      ak.array() = (a.array().cast<double>() * k).cast<float>();
      const FlashOnlyResult r = compute_flash_only(ak, f, ea * k, ef, {true});
      worst = std::max(worst, max_abs(r.image, base.image));
    }
  }
  c.expect(worst < 1e-6, "difference too large");
  // The 60 ms / 40 ms ratio on a hand-checked pixel: 0.5 - (40/60) 0.6 = 0.1.
  const FlashOnlyResult px = compute_flash_only(ImageF(1, 1, 1, 0.6f), ImageF(1, 1, 1, 0.5f), 60, 40);
  c.expect(std::abs(px.image(0, 0) - 0.1) < 1e-6, "60/40 ms ratio check");
  c.note << (c.ok ? "" : "; ") << "max change " << worst;
  return c;
}

// ---------------------------------------------------------------- 3
Check composition_constants() {
  Check c;
  const SynthRecipe recipe;
  c.expect(recipe.transmittance == 0.61 && recipe.reflectance == 0.22, "default constants differ");
  double worst = 0;
  for (auto [tv, rv] : std::vector<std::pair<float, float>>{{1.0f, 0.5f}, {0.3f, 0.9f}, {0.0f, 1.0f}}) {
    const ImageF t(96, 96, 3, tv), r(96, 96, 3, rv), f(96, 96, 3, 0.1f);
    const SynthSample s = compose_aligned(t, r, f, recipe, 4);
    const double expect = 0.61 * tv + 0.22 * rv;
    worst = std::max(worst, (s.ambient.array().cast<double>() - expect).abs().maxCoeff());
    ImageF rec = s.ambient;
    rec.array() -= s.reflection.array();
    worst = std::max(worst, max_abs(rec, s.transmission));
    worst = std::max(worst, (s.transmission.array().cast<double>() - 0.61 * tv).abs().maxCoeff());
  }
  c.expect(worst <= 1e-6, "composition error");
  c.note << (c.ok ? "" : "; ") << "max error " << worst;
  return c;
}

// ---------------------------------------------------------------- 4
Check homography_synthesis() {
  Check c;
  double worst_corner = 0;
  Rng rng(77);
  for (int i = 0; i < 2000; ++i) {
    const Homography h = random_corner_homography(640, 480, 8, rng);
    for (const auto& p : {Eigen::Vector2d(0, 0), Eigen::Vector2d(639, 0), Eigen::Vector2d(639, 479),
                          Eigen::Vector2d(0, 479)}) {
      worst_corner = std::max(worst_corner, (h.apply(p) - p).cwiseAbs().maxCoeff());
    }
  }
  double worst_epe = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const SynthSample s = synth_misaligned_homography(procedural_scene(800, 600, 100 + seed),
                                                      procedural_scene(800, 600, 200 + seed),
                                                      procedural_scene(800, 600, 300 + seed), {}, seed);
    c.expect(s.crop.width == 640 && s.crop.height == 480, "crop is not 640x480");
    for (const Homography* h : {&*s.h_t, &*s.h_r}) {
      for (const auto& p : {Eigen::Vector2d(0, 0), Eigen::Vector2d(639, 0), Eigen::Vector2d(639, 479),
                            Eigen::Vector2d(0, 479)}) {
        worst_corner = std::max(worst_corner, (h->apply(p) - p).cwiseAbs().maxCoeff());
      }
    }
    for (int y = 0; y < 480; ++y)
      for (int x = 0; x < 640; ++x) {
        const Eigen::Vector2d p(x, y);
        worst_epe = std::max(worst_epe, (s.h_t->apply(p) - p - s.flow_t->at(x, y)).norm());
      }
  }
  c.expect(worst_corner <= 8.0, "corner displacement above 8 px");
  c.expect(worst_epe < 1e-4, "flow does not match the homography");
  c.note << (c.ok ? "" : "; ") << "max corner " << worst_corner << " px, max EPE " << worst_epe << " px";
  return c;
}

// ---------------------------------------------------------------- 5
Check depth_synthesis() {
  Check c;
  const LinearImage t = procedural_scene(160, 128, 1), r = procedural_scene(160, 128, 2),
                    f = procedural_scene(160, 128, 3);
  const DepthMap dt = procedural_depth(160, 128, 4), dr = procedural_depth(160, 128, 5, 0.4, 1.0);
  SynthRecipe still;
  still.motion_bounds = {0, 0};
  const SynthSample a = compose_aligned(t, r, f, still, 9);
  const SynthSample d = synth_misaligned_depth(t, r, f, dt, dr, still, 9);
  c.expect(a.ambient == d.ambient && a.flash == d.flash && a.flash_only == d.flash_only &&
               a.transmission == d.transmission && a.reflection == d.reflection,
           "zero motion differs from aligned");

  double worst = 0;
  const Intrinsics k{1000, 63.5, 47.5};
  for (double depth : {0.5, 1.0, 2.5}) {
    for (const Eigen::Vector3d tr : {Eigen::Vector3d(5, 0, 0), Eigen::Vector3d(-3, 4, 0)}) {
      CameraMotion m;
      m.translation_mm = tr;
      const DepthFlow fl = depth_reproject_flow(DepthMap(128, 96, 1, static_cast<float>(depth)), m, k);
      const double eu = k.focal_px * tr.x() * 1e-3 / depth, ev = k.focal_px * tr.y() * 1e-3 / depth;
      for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 128; ++x)
          worst = std::max(worst, std::hypot(fl.flow.u(x, y) - eu, fl.flow.v(x, y) - ev));
    }
  }
  c.expect(worst < 1e-4, "translation flow differs from f t / d");

  DepthMap ramp(64, 1, 1);
  for (int x = 0; x < 64; ++x) ramp(x, 0) = 0.4f + 0.1f * x;
  CameraMotion m;
  m.translation_mm = {3, -2, 0};
  const DepthFlow fl = depth_reproject_flow(ramp, m, Intrinsics{800, 31.5, 0});
  bool decreasing = true;
  for (int x = 1; x < 64; ++x) decreasing = decreasing && fl.flow.at(x, 0).norm() < fl.flow.at(x - 1, 0).norm();
  c.expect(decreasing, "flow magnitude not decreasing with depth");
  c.note << (c.ok ? "" : "; ") << "max deviation from f t / d " << worst << " px";
  return c;
}

// ---------------------------------------------------------------- 6
std::vector<Correspondence> exact_pairs(const Homography& h, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Correspondence> out;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d p(rng.uniform(0, 640), rng.uniform(0, 480));
    out.push_back({p, h.apply(p), 1});
  }
  return out;
}

Homography test_homography(std::uint64_t seed) {
  Rng rng(seed);
  Eigen::Matrix3d m;
  m << 1 + 0.05 * rng.uniform(-1, 1), 0.05 * rng.uniform(-1, 1), 10 * rng.uniform(-1, 1),
      0.05 * rng.uniform(-1, 1), 1 + 0.05 * rng.uniform(-1, 1), 10 * rng.uniform(-1, 1),
      1e-4 * rng.uniform(-1, 1), 1e-4 * rng.uniform(-1, 1), 1;
  return Homography(m);
}

Check dlt_ransac() {
  Check c;
  double worst_clean = 0, worst_inlier = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Homography h = test_homography(seed);
    const auto pairs = exact_pairs(h, 50, seed + 100);
    const Homography fit = fit_homography_dlt(pairs);
    for (const auto& p : pairs) worst_clean = std::max(worst_clean, transfer_error(fit, p));

    auto noisy = pairs;
    std::vector<bool> outlier(noisy.size(), false);
    Rng rng(seed + 200);
    for (std::size_t i = 0; i < noisy.size(); i += 10) {
      for (std::size_t j = i; j < i + 3 && j < noisy.size(); ++j) {
        const double a = rng.uniform(0, 2 * M_PI), r = rng.uniform(20, 80);
        noisy[j].dst += Eigen::Vector2d(r * std::cos(a), r * std::sin(a));
        outlier[j] = true;
      }
    }
    RansacOptions o1;
    o1.seed = seed;
    o1.threads = 1;
    RansacOptions o8 = o1;
    o8.threads = 8;
    const HomographyFit f1 = estimate_homography(noisy, HomographyMethod::ransac_dlt, o1);
    const HomographyFit f8 = estimate_homography(noisy, HomographyMethod::ransac_dlt, o8);
    c.expect(f1.homography.matrix() == f8.homography.matrix() && f1.inliers == f8.inliers,
             "thread count changed the RANSAC result");
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      if (!outlier[i]) worst_inlier = std::max(worst_inlier, transfer_error(f1.homography, noisy[i]));
    }
  }
  c.expect(worst_clean < 1e-6, "noiseless reprojection too large");
  c.expect(worst_inlier < 0.5, "inlier reprojection too large");
  c.note << (c.ok ? "" : "; ") << "noiseless " << worst_clean << " px, inliers " << worst_inlier << " px";
  return c;
}

// ---------------------------------------------------------------- 7
Check warp_round_trip() {
  Check c;
  double worst_psnr = INFINITY;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ImageF img = procedural_scene(256, 192, 40 + seed);
    Rng rng(seed);
    const Homography h = random_corner_homography(256, 192, 8, rng);
    const WarpResult fwd = warp_by_flow(img, homography_to_flow(h, 256, 192));
    const WarpResult back = warp_by_flow(fwd.image, homography_to_flow(h.inverse(), 256, 192));
    Mask interior(256, 192, 1);
    for (int y = 16; y < 176; ++y)
      for (int x = 16; x < 240; ++x) interior(x, y) = 1;
    worst_psnr = std::min(worst_psnr, psnr(back.image, img, 1.0, &interior).db);
    const WarpResult id = warp_by_flow(img, FlowField(256, 192));
    c.expect(id.image == img && mask_count(id.valid) == id.valid.size(), "zero flow is not the identity");
  }
  c.expect(worst_psnr >= 40.0, "round trip below 40 dB");
  c.note << (c.ok ? "" : "; ") << "worst interior PSNR " << worst_psnr << " dB";
  return c;
}

// ---------------------------------------------------------------- 8
Check reflection_pass_contract() {
  Check c;
  const SynthSample s = compose_aligned(procedural_scene(96, 96, 1), procedural_scene(96, 96, 2),
                                        procedural_scene(96, 96, 3), {}, 4);
  const LinearPair in{s.ambient, s.flash, 1, 1};
  int calls = 0;
  auto counting = [&calls](std::span<const ImageF> x) {
    ++calls;
    return x[0];
  };
  const Estimator g_r{"r", EstimatorRole::reflection, default_inputs(EstimatorRole::reflection), counting};
  for (const auto& inputs : std::vector<std::vector<Channel>>{{Channel::ambient, Channel::flash_only},
                                                            {Channel::ambient, Channel::reflection_estimate,
                                                             Channel::flash_only}}) {
    const Estimator bad{"t", EstimatorRole::transmission, inputs, counting};
    bool rejected = false;
    try {
      run_two_stage(in, g_r, bad);
    } catch (const ContractViolation&) {
      rejected = true;
    }
    c.expect(rejected, "flash-only transmission input accepted");
  }
  c.expect(calls == 0, "an estimator ran before rejection");

  // What g_T actually receives, captured at the call.
  std::vector<ImageF> seen;
  const Estimator g_t{"t", EstimatorRole::transmission, default_inputs(EstimatorRole::transmission),
                      [&seen](std::span<const ImageF> x) {
                        seen.assign(x.begin(), x.end());
                        return x[0];
                      }};
  const PipelineResult r = traced(run_two_stage(in, g_r, g_t));
  c.expect(seen.size() == 2 && seen[0] == r.ambient && seen[1] == r.r_hat, "g_T inputs differ from {ambient, R_hat}");
  return c;
}

// ---------------------------------------------------------------- 9
Check oracle_end_to_end() {
  Check c;
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SynthSample s = compose_aligned(procedural_scene(128, 96, 10 * seed + 1),
                                          procedural_scene(128, 96, 10 * seed + 2),
                                          procedural_scene(128, 96, 10 * seed + 3), {}, seed);
    const LinearImage r_a = s.reflection;
    const Estimator g_r{"oracle", EstimatorRole::reflection, default_inputs(EstimatorRole::reflection),
                        [r_a](std::span<const ImageF>) { return r_a; }};
    const Estimator g_t = difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
    PipelineOptions o;
    o.space = EstimatorSpace::linear;
    const PipelineResult r = traced(run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_r, g_t, o));
    const PsnrResult p = psnr(r.t_hat, s.transmission);
    if (r.t_hat == s.transmission && p.exact) ++exact;
  }
  c.expect(exact == 20, "oracle not exact on every aligned sample");

  int improved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SynthSample s = synth_misaligned_homography(procedural_scene(160, 128, 10 * seed + 5),
                                                      procedural_scene(160, 128, 10 * seed + 6),
                                                      procedural_scene(160, 128, 10 * seed + 7), {}, 1000 + seed);
    const auto g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
    const auto g_t = difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
    PipelineOptions plain;
    plain.space = EstimatorSpace::linear;
    plain.flash_only.signed_mode = true;
    PipelineOptions aligned = plain;
    aligned.align.method = AlignMethod::external_flow;
    aligned.align.flow = *s.flow_t;
    const LinearPair in{s.ambient, s.flash, 1, 1};
    const PipelineResult a = traced(run_two_stage(in, g_r, g_t, plain));
    const PipelineResult b = traced(run_two_stage(in, g_r, g_t, aligned));
    const Mask common = mask_and(b.valid, s.validity);
    if (l2_loss(b.flash_only, s.flash_only, &common) < l2_loss(a.flash_only, s.flash_only, &common)) ++improved;
  }
  c.expect(improved >= 19, "alignment improved too few samples");
  c.note << (c.ok ? "" : "; ") << exact << "/20 exact, " << improved << "/20 improved by alignment";
  return c;
}

// ---------------------------------------------------------------- 10
double brute_ssim(const ImageF& a, const ImageF& b) {
  const int n = 11;
  const double sigma = 1.5;
  std::vector<double> w(n * n);
  double total = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) total += w[j * n + i] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * sigma * sigma));
  for (auto& v : w) v /= total;
  const ImageF ga = to_grayscale(a), gb = to_grayscale(b);
  const double c1 = 1e-4, c2 = 9e-4;
  double sum = 0;
  int count = 0;
  for (int y0 = 0; y0 + n <= a.height(); ++y0)
    for (int x0 = 0; x0 + n <= a.width(); ++x0) {
      double ma = 0, mb = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          ma += w[j * n + i] * ga(x0 + i, y0 + j);
          mb += w[j * n + i] * gb(x0 + i, y0 + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double da = ga(x0 + i, y0 + j) - ma, db = gb(x0 + i, y0 + j) - mb;
          va += w[j * n + i] * da * da;
          vb += w[j * n + i] * db * db;
          cov += w[j * n + i] * da * db;
        }
      sum += (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return sum / count;
}

Check metric_oracles() {
  Check c;
  ImageF x(64, 64, 3, 0.0f), y(64, 64, 3);
  y.array() = 0.1f;
  const double p = psnr(y, x).db;
  c.expect(std::abs(p - 20.0) <= 1e-6, "PSNR of 0.1 offset");
  const ImageF a = uniform_image(64, 64, 3, 5, 0, 1);
  c.expect(ssim(a, a) == 1.0, "SSIM(a, a) != 1");
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ImageF u = uniform_image(64, 64, 3, 10 + seed, 0, 1);
    ImageF v = uniform_image(64, 64, 3, 20 + seed, -0.2f, 0.2f);
    v.array() += u.array();
    worst = std::max(worst, std::abs(ssim(u, v) - brute_ssim(u, v)));
  }
  c.expect(worst <= 1e-6, "SSIM differs from the brute-force reference");
  c.note << (c.ok ? "" : "; ") << "PSNR " << std::setprecision(10) << p << " dB, SSIM deviation " << worst;
  return c;
}

// ---------------------------------------------------------------- 11
Check linear_isp_linearity() {
  Check c;
  CaptureMeta m;
  m.set_black_level(0);
  m.white_level = 65535;
  m.exposure_ms = 10;
  m.wb_gains = {2.0, 1.0, 1.5};
  const IspConfig cfg = IspConfig::from_meta(m, StageSet::linear_only);
  const ImageF mosaic = uniform_image(96, 64, 1, 9, 0.0f, 0.3f);
  const ImageF base = run_isp_linear_mosaic(mosaic, Cfa::RGGB, cfg);
  // Raw samples that stay integers after scaling.
  RawFrame raw(96, 64, Cfa::RGGB, m);
  for (int yy = 0; yy < 64; ++yy)
    for (int xx = 0; xx < 96; ++xx) raw(xx, yy) = static_cast<std::uint16_t>(4 * std::lround(mosaic(xx, yy) * 4000));
  const ImageF raw_base = run_isp(raw, cfg);
  double worst = 0;
  for (double alpha : {0.25, 0.5, 2.0}) {
    ImageF scaled = mosaic;
    scaled.array() = (mosaic.array().cast<double>() * alpha).cast<float>();
    const ImageF out = run_isp_linear_mosaic(scaled, Cfa::RGGB, cfg);
    worst = std::max(worst, (out.array().cast<double>() - alpha * base.array().cast<double>()).abs().maxCoeff());
    RawFrame r2 = raw;
    r2.samples.array() = (raw.samples.array().cast<double>() * alpha).cast<std::uint16_t>();
    const ImageF out2 = run_isp(r2, cfg);
    worst = std::max(worst, (out2.array().cast<double>() - alpha * raw_base.array().cast<double>()).abs().maxCoeff());
  }
  c.expect(worst <= 1e-6, "linear ISP is not linear");
  c.note << (c.ok ? "" : "; ") << "max deviation " << worst;
  return c;
}

// ---------------------------------------------------------------- 12
int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Per-file hashes; trace files are compared with their timing block removed.
std::map<std::string, std::string> tree_digest(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).string();
    const auto bytes = io::read_bytes(e.path());
    if (e.path().extension() == ".json" && rel.find("trace") != std::string::npos) {
      nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end());
      j.erase("meta");
      for (const auto& s : j.at("stages")) {
        if (s.at("stage") == "transmission") {
          ++g_traces_checked;
          g_traces_ok = g_traces_ok && s.at("inputs") == nlohmann::json::array({"ambient", "reflection_estimate"});
        }
      }
      const std::string d = j.dump();
      out[rel] = sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(d.data()), d.size()));
    } else {
      out[rel] = sha256_hex(bytes);
    }
  }
  return out;
}

Check cli_determinism() {
  Check c;
  const fs::path root = fs::temp_directory_path() / ("flashcue_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = FLASHCUE_CLI;
  std::vector<std::map<std::string, std::string>> synth, run, single;
  // Same paths every time: configs record their input paths.
  const fs::path d = root / "data", p = root / "pred", s = root / "single";
  for (int threads : {1, 8, 1}) {
    for (const auto& dir : {d, p, s}) fs::remove_all(dir);
    const std::string g = cli + " --seed 11 --threads " + std::to_string(threads);
    c.expect(shell(g + " synth --procedural 3 --size 128x96 --mode homography --out " + d.string()) == 0,
             "synth failed");
    c.expect(shell(g + " run --dataset " + (d / "manifest.json").string() + " --align external --out " + p.string()) == 0,
             "run failed");
    const fs::path sample = d / "scene0_r0";
    c.expect(shell(g + " run --ambient " + (sample / "ambient.lfr").string() + " --flash " +
                   (sample / "flash.lfr").string() + " --align homography --out " + s.string()) == 0,
             "single run failed");
    if (!c.ok) break;
    synth.push_back(tree_digest(d));
    run.push_back(tree_digest(p));
    single.push_back(tree_digest(s));
  }
  if (c.ok) {
    c.expect(synth[0] == synth[1] && synth[0] == synth[2], "synth outputs differ");
    c.expect(run[0] == run[1] && run[0] == run[2], "dataset run outputs differ");
    c.expect(single[0] == single[1] && single[0] == single[2], "single run outputs differ");
    if (c.ok) {
      c.note << synth[0].size() + run[0].size() + single[0].size()
             << " files identical across 3 invocations (threads 1, 8, 1)";
    }
  }
  fs::remove_all(root);
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"1 flash-only identity", flash_only_identity},
      {"2 exposure compensation", exposure_compensation},
      {"3 composition constants", composition_constants},
      {"4 homography synthesis", homography_synthesis},
      {"5 depth synthesis", depth_synthesis},
      {"6 DLT/RANSAC", dlt_ransac},
      {"7 warp round trip", warp_round_trip},
      {"8 reflection-pass contract", reflection_pass_contract},
      {"9 oracle end-to-end", oracle_end_to_end},
      {"10 metric oracles", metric_oracles},
      {"11 linear ISP linearity", linear_isp_linearity},
      {"12 determinism", cli_determinism},
  };
  std::vector<Check> results(criteria.size());
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      results[i] = criteria[i].second();
    } catch (const std::exception& e) {
      results[i].ok = false;
      results[i].note << "exception: " << e.what();
    }
  }
  // The wiring audit covers every trace produced by the runs above, CLI included.
  Check& contract = results[7];
  if (!g_traces_ok || g_traces_checked == 0) {
    contract.ok = false;
    contract.note << "a stage trace showed other g_T inputs; ";
  }
  contract.note << g_traces_checked << " traces audited";
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::cout << (results[i].ok ? "PASS" : "FAIL") << "  " << criteria[i].first << "  " << results[i].note.str()
              << "\n";
    failures += results[i].ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
