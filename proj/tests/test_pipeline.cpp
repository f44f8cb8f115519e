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

#include <doctest.h>

#include <fstream>

#include "flashcue/io.hpp"
#include "flashcue/isp.hpp"
#include "flashcue/metrics.hpp"
#include "flashcue/pipeline.hpp"
#include "flashcue/synth.hpp"
#include "support.hpp"

using namespace flashcue;

namespace {

SynthSample aligned_sample(std::uint64_t seed, int size = 96) {
  return compose_aligned(procedural_scene(size, size, seed), procedural_scene(size, size, seed + 1),
                         procedural_scene(size, size, seed + 2), {}, seed);
}

/// Returns a fixed image and records what it was given.
struct Recorder {
  std::shared_ptr<std::vector<ImageF>> seen = std::make_shared<std::vector<ImageF>>();
  std::shared_ptr<int> calls = std::make_shared<int>(0);

  Estimator make(std::string name, EstimatorRole role, std::vector<Channel> inputs, ImageF result) const {
    auto s = seen;
    auto c = calls;
    return {std::move(name), role, std::move(inputs), [s, c, result](std::span<const ImageF> in) {
              ++*c;
              s->assign(in.begin(), in.end());
              return result;
            }};
  }
};

Estimator gt_reflection(const LinearImage& r_a) {
  return {"oracle:reflection", EstimatorRole::reflection, default_inputs(EstimatorRole::reflection),
          [r_a](std::span<const ImageF>) { return r_a; }};
}

PipelineOptions linear_opts() {
  PipelineOptions o;
  o.space = EstimatorSpace::linear;
  return o;
}

std::string fake(const std::string& behave, const std::string& log = "") {
  std::string s = std::string("cmd:") + FLASHCUE_FAKE_ESTIMATOR + " --behave " + behave;
  if (!log.empty()) s += " --log " + log;
  return s;
}

}  // namespace

TEST_CASE("zero reflection and difference transmission pass the ambient through") {
  const SynthSample s = aligned_sample(1);
  const LinearPair in{s.ambient, s.flash, 1, 1};
  const Estimator g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
  const Estimator g_t = difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
  const PipelineResult lin = run_two_stage(in, g_r, g_t, linear_opts());
  CHECK(lin.t_hat == s.ambient);
  const PipelineResult srgb = run_two_stage(in, g_r, g_t);
  CHECK(srgb.t_hat == gamma_encode_float(s.ambient));
  CHECK(srgb.t_hat.same_shape(s.ambient));
  CHECK(srgb.r_hat.same_extent(s.ambient));
}

TEST_CASE("oracle estimators recover the transmission exactly") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const SynthSample s = aligned_sample(seed);
    REQUIRE(s.clamped_pixels == 0);
    const Estimator g_t =
        difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
    const PipelineResult r = run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, gt_reflection(s.reflection), g_t,
                                           linear_opts());
    CHECK(r.t_hat == s.transmission);
    const PsnrResult p = psnr(r.t_hat, s.transmission);
    CHECK(p.exact);
    CHECK(p.db == kExactPsnrDb);
  }
}

TEST_CASE("reflection estimator receives ambient and grayscale flash-only") {
  const SynthSample s = aligned_sample(2);
  Recorder rec_r, rec_t;
  const ImageF r_val(s.ambient.width(), s.ambient.height(), 3, 0.01f);
  const ImageF t_val(s.ambient.width(), s.ambient.height(), 3, 0.3f);
  const auto g_r = rec_r.make("r", EstimatorRole::reflection, {Channel::ambient, Channel::flash_only_gray}, r_val);
  const auto g_t = rec_t.make("t", EstimatorRole::transmission, {Channel::ambient, Channel::reflection_estimate}, t_val);
  const PipelineResult r = run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_r, g_t, linear_opts());
  REQUIRE(rec_r.seen->size() == 2);
  CHECK((*rec_r.seen)[0] == s.ambient);
  CHECK((*rec_r.seen)[1].channels() == 1);
  CHECK((*rec_r.seen)[1] == r.flash_only_gray);
  REQUIRE(rec_t.seen->size() == 2);
  CHECK((*rec_t.seen)[0] == s.ambient);
  CHECK((*rec_t.seen)[1] == r_val);
  CHECK(r.t_hat == t_val);
  const StageRecord* t = r.trace.find("transmission");
  REQUIRE(t);
  CHECK(t->inputs == std::vector<Channel>{Channel::ambient, Channel::reflection_estimate});
  CHECK(r.trace.find("reflection")->inputs == std::vector<Channel>{Channel::ambient, Channel::flash_only_gray});
}

TEST_CASE("a transmission estimator asking for flash-only is rejected before execution") {
  const SynthSample s = aligned_sample(3);
  Recorder rec_r, rec_t;
  const ImageF any(s.ambient.width(), s.ambient.height(), 3);
  const auto g_r = rec_r.make("r", EstimatorRole::reflection, default_inputs(EstimatorRole::reflection), any);
  for (const auto& inputs : std::vector<std::vector<Channel>>{
           {Channel::ambient, Channel::flash_only},
           {Channel::ambient, Channel::reflection_estimate, Channel::flash_only},
           {Channel::flash_only, Channel::reflection_estimate}}) {
    const auto g_t = rec_t.make("t", EstimatorRole::transmission, inputs, any);
    try {
      run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_r, g_t);
      FAIL("expected a contract violation");
    } catch (const ContractViolation& e) {
      CHECK(std::string(e.what()).find("flash_only") != std::string::npos);
    }
  }
  CHECK(*rec_r.calls == 0);
  CHECK(*rec_t.calls == 0);
}

TEST_CASE("other wiring mistakes are rejected") {
  const ImageF any(8, 8, 3);
  Recorder rec;
  const auto ok_r = rec.make("r", EstimatorRole::reflection, default_inputs(EstimatorRole::reflection), any);
  const auto ok_t = rec.make("t", EstimatorRole::transmission, default_inputs(EstimatorRole::transmission), any);
  CHECK_NOTHROW(validate_two_stage(ok_r, ok_t));
  CHECK_THROWS_AS(validate_two_stage(rec.make("r", EstimatorRole::reflection, {Channel::ambient}, any), ok_t),
                  ContractViolation);
  CHECK_THROWS_AS(
      validate_two_stage(rec.make("r", EstimatorRole::reflection, {Channel::ambient, Channel::flash_only}, any), ok_t),
      ContractViolation);
  CHECK_THROWS_AS(validate_two_stage(ok_r, rec.make("t", EstimatorRole::transmission, {Channel::ambient}, any)),
                  ContractViolation);
  CHECK_THROWS_AS(validate_two_stage(ok_t, ok_t), ContractViolation);
  CHECK_THROWS_AS(
      validate_two_stage(ok_r, rec.make("t", EstimatorRole::transmission,
                                        {Channel::ambient, Channel::ambient, Channel::reflection_estimate}, any)),
      ContractViolation);
  CHECK_THROWS_AS(validate_base(rec.make("b", EstimatorRole::base, {Channel::ambient, Channel::flash}, any),
                                BaseVariant::flash_only_input),
                  ContractViolation);
}

TEST_CASE("estimator output shape is checked") {
  const SynthSample s = aligned_sample(4);
  Recorder rec;
  const auto g_r = rec.make("r", EstimatorRole::reflection, default_inputs(EstimatorRole::reflection), ImageF(5, 5, 3));
  const auto g_t = difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
  CHECK_THROWS_AS(run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_r, g_t), ContractViolation);
  ImageF nan(s.ambient.width(), s.ambient.height(), 3);
  nan(1, 1, 1) = std::numeric_limits<float>::quiet_NaN();
  const auto g_nan = rec.make("r", EstimatorRole::reflection, default_inputs(EstimatorRole::reflection), nan);
  CHECK_THROWS_AS(run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_nan, g_t), ContractViolation);
}

TEST_CASE("raw input with identity alignment matches the raw flash-only computation") {
  const RawPair pair{io::read_raw_frame(FLASHCUE_TEST_DATA "/pair_ambient.pgm"),
                     io::read_raw_frame(FLASHCUE_TEST_DATA "/pair_flash.pgm")};
  const auto g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
  const auto g_t = passthrough_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
  const PipelineResult r = run_two_stage(pair, g_r, g_t);
  CHECK(io::encode_lfr(r.flash_only) == io::read_bytes(FLASHCUE_TEST_DATA "/pair_fo.lfr"));
  CHECK(r.flash_only_rgb == flash_only_to_rgb(r.flash_only, pair.ambient.cfa, pair.ambient.meta));
  CHECK(r.ambient == run_isp(pair.ambient, IspConfig::from_meta(pair.ambient.meta)));
  CHECK(r.t_hat == r.ambient);
  CHECK(mask_count(r.saturated) == 5);
  CHECK(r.trace.has("linear_isp"));
}

TEST_CASE("exposure compensation happens inside the pipeline") {
  const SynthSample s = aligned_sample(5);
  LinearImage dim = s.ambient;
  dim.array() *= 0.5f;
  const auto g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
  const auto g_t = difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
  const PipelineResult ref = run_two_stage(LinearPair{s.ambient, s.flash, 10, 10}, g_r, g_t, linear_opts());
  const PipelineResult half = run_two_stage(LinearPair{dim, s.flash, 5, 10}, g_r, g_t, linear_opts());
  CHECK(testing::max_abs_diff(ref.flash_only, half.flash_only) < 1e-6);
}

TEST_CASE("base pipeline variants") {
  const SynthSample s = aligned_sample(6);
  const LinearPair in{s.ambient, s.flash, 1, 1};
  const auto id = passthrough_estimator(EstimatorRole::base, {Channel::ambient, Channel::flash_only});
  const PipelineResult fo = run_base(in, id, BaseVariant::flash_only_input);
  CHECK(fo.t_hat == gamma_encode_float(s.ambient));
  CHECK(fo.trace.has("flash_only"));

  const auto id_f = passthrough_estimator(EstimatorRole::base, {Channel::ambient, Channel::flash});
  const PipelineResult fl = run_base(in, id_f, BaseVariant::flash_input);
  CHECK(fl.t_hat == gamma_encode_float(s.ambient));
  CHECK_FALSE(fl.trace.has("flash_only"));
  CHECK(fl.flash_only.empty());

  Recorder rec;
  const auto g_b = rec.make("b", EstimatorRole::base, {Channel::ambient, Channel::flash}, s.ambient);
  const PipelineResult lin = run_base(in, g_b, BaseVariant::linear_space);
  CHECK_FALSE(lin.trace.has("flash_only"));
  CHECK((*rec.seen)[0] == s.ambient);
  CHECK((*rec.seen)[1] == s.flash);
}

TEST_CASE("linear-space base inputs scale with the raw samples") {
  CaptureMeta m = testing::simple_meta(0, 65535, 20);
  m.wb_gains = {1.7, 1.0, 1.3};
  const LinearImage scene = procedural_scene(32, 32, 9, 1);
  // Multiples of 4 so every scaled sample stays an integer.
  RawFrame a(32, 32, Cfa::RGGB, m), f(32, 32, Cfa::RGGB, m);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      a(x, y) = static_cast<std::uint16_t>(4 * std::lround(scene(x, y) * 2000));
      f(x, y) = static_cast<std::uint16_t>(a(x, y) + 4 * (700 + 5 * x));
    }
  const ImageF any(32, 32, 3);
  Recorder r1;
  run_base(RawPair{a, f}, r1.make("b", EstimatorRole::base, {Channel::ambient, Channel::flash}, any),
           BaseVariant::linear_space);
  for (double alpha : {0.25, 0.5, 2.0}) {
    RawFrame a2 = a, f2 = f;
    a2.samples.array() = (a.samples.array().cast<double>() * alpha).cast<std::uint16_t>();
    f2.samples.array() = (f.samples.array().cast<double>() * alpha).cast<std::uint16_t>();
    Recorder r2;
    run_base(RawPair{a2, f2}, r2.make("b", EstimatorRole::base, {Channel::ambient, Channel::flash}, any),
             BaseVariant::linear_space);
    for (int k = 0; k < 2; ++k) {
      const ImageF& x = (*r1.seen)[k];
      const ImageF& y = (*r2.seen)[k];
      const double err = (y.array().cast<double>() - alpha * x.array().cast<double>()).abs().maxCoeff();
      CHECK(err <= 1e-6);
    }
  }
}

TEST_CASE("l2 loss") {
  const ImageF a = testing::random_image(10, 10, 3, 1);
  CHECK(l2_loss(a, a) == 0);
  ImageF b(10, 10, 3, 0.2f), c(10, 10, 3, 0.1f);
  CHECK(l2_loss(b, c) == doctest::Approx(0.01).epsilon(1e-6));
  const ImageF d = testing::random_image(10, 10, 3, 2);
  double sum = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double e = static_cast<double>(a.array()[i]) - d.array()[i];
    sum += e * e;
  }
  CHECK(std::abs(l2_loss(a, d) - sum / a.size()) < 1e-9);
}

TEST_CASE("identity alignment leaves the flash untouched") {
  const SynthSample s = aligned_sample(7);
  const AlignResult r = align_preprocess(s.ambient, s.flash, {});
  CHECK(r.warped_flash == s.flash);
  CHECK(r.flow.is_zero());
  CHECK(mask_count(r.valid) == r.valid.size());
}

TEST_CASE("homography alignment recovers a synthetic warp") {
  const LinearImage scene = procedural_scene(160, 128, 21);
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  m(0, 2) = 3.2;
  m(1, 2) = -2.1;
  m(0, 1) = 0.01;
  m(2, 0) = 2e-5;
  const Homography h(m);
  // flash(p) = scene(H^-1 p), so the ambient->flash flow is H p - p.
  const LinearImage flash = warp_by_flow(scene, homography_to_flow(h.inverse(), 160, 128), Boundary::clamp).image;
  AlignSpec spec;
  spec.method = AlignMethod::homography;
  spec.ransac.seed = 3;
  const AlignResult r = align_preprocess(scene, flash, spec);
  REQUIRE(r.homography);
  const FlowField gt = homography_to_flow(h, 160, 128);
  CHECK(endpoint_error(r.flow, gt).mean < 0.5);
}

TEST_CASE("ground-truth flow alignment lowers the flash-only residual") {
  const LinearImage t = procedural_scene(128, 128, 30), refl = procedural_scene(128, 128, 31);
  const LinearImage f = procedural_scene(128, 128, 32);
  const SynthSample s = synth_misaligned_homography(t, refl, f, {}, 33);
  const auto g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
  const auto g_t = difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
  const LinearPair in{s.ambient, s.flash, 1, 1};
  PipelineOptions plain = linear_opts();
  plain.flash_only.signed_mode = true;
  PipelineOptions aligned = plain;
  aligned.align.method = AlignMethod::external_flow;
  aligned.align.flow = *s.flow_t;
  const PipelineResult a = run_two_stage(in, g_r, g_t, plain);
  const PipelineResult b = run_two_stage(in, g_r, g_t, aligned);
  Mask common = mask_and(b.valid, s.validity);
  CHECK(l2_loss(b.flash_only, s.flash_only, &common) < l2_loss(a.flash_only, s.flash_only, &common));
  CHECK(b.flow == *s.flow_t);
  CHECK(b.trace.has("align:external_flow"));
}

TEST_CASE("flow estimators feed external alignment") {
  const SynthSample s = aligned_sample(8);
  Recorder rec;
  const ImageF zero_flow(s.ambient.width(), s.ambient.height(), 2);
  AlignSpec spec;
  spec.method = AlignMethod::external_flow;
  spec.flow_estimator = rec.make("flow", EstimatorRole::flow, default_inputs(EstimatorRole::flow), zero_flow);
  const AlignResult r = align_preprocess(s.ambient, s.flash, spec);
  CHECK(*rec.calls == 1);
  CHECK((*rec.seen)[1] == s.flash);
  CHECK(r.warped_flash == s.flash);
  spec.flow_estimator->inputs = {Channel::ambient, Channel::flash_only};
  CHECK_THROWS_AS(align_preprocess(s.ambient, s.flash, spec), ContractViolation);
  AlignSpec missing;
  missing.method = AlignMethod::external_flow;
  CHECK_THROWS_AS(align_preprocess(s.ambient, s.flash, missing), ConfigError);
}

TEST_CASE("external estimators exchange LFR1 files") {
  testing::TempDir dir("ext");
  const SynthSample s = aligned_sample(9, 64);
  const std::string log = (dir / "log.txt").string();
  const auto timeout = std::chrono::milliseconds(20000);
  const Estimator g_r = estimator_from_spec(fake("zero", log), EstimatorRole::reflection, {}, dir / "w_r", timeout);
  const Estimator g_t = estimator_from_spec(fake("difference", log), EstimatorRole::transmission, {}, dir / "w_t", timeout);
  const PipelineResult r = run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_r, g_t, linear_opts());
  CHECK(r.t_hat == s.ambient);
  std::ifstream in(log);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l1 == "reflection ambient flash_only_gray");
  CHECK(l2 == "transmission ambient reflection_estimate");
  CHECK(std::filesystem::is_empty(dir / "w_t"));
}

TEST_CASE("external estimator failures") {
  testing::TempDir dir("extfail");
  const SynthSample s = aligned_sample(10, 64);
  const LinearPair in{s.ambient, s.flash, 1, 1};
  const auto g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
  auto run_with = [&](const std::string& behave, int ms) {
    const Estimator g_t = estimator_from_spec(fake(behave), EstimatorRole::transmission, {}, dir / behave,
                                              std::chrono::milliseconds(ms));
    run_two_stage(in, g_r, g_t);
  };
  CHECK_THROWS_AS(run_with("fail", 20000), StageFailure);
  CHECK_THROWS_AS(run_with("silent", 20000), StageFailure);
  CHECK_THROWS_AS(run_with("wrong-size", 20000), ContractViolation);
  const auto t0 = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(run_with("sleep", 200), StageFailure);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(4));
  CHECK_THROWS_AS(estimator_from_spec("cmd:/nonexistent/program", EstimatorRole::reflection, {}, dir / "x",
                                      std::chrono::milliseconds(2000))
                      .invoke(std::vector<ImageF>{s.ambient, s.ambient}),
                  StageFailure);
  CHECK_THROWS_AS(estimator_from_spec("magic", EstimatorRole::reflection, {}, dir / "y", std::chrono::milliseconds(1)),
                  ConfigError);
}

TEST_CASE("estimator description files") {
  testing::TempDir dir("estfile");
  const nlohmann::json j = {{"command", {FLASHCUE_FAKE_ESTIMATOR, "--behave", "copy"}},
                            {"inputs", {"ambient", "flash_only"}},
                            {"timeout_ms", 5000}};
  std::ofstream(dir / "est.json") << j.dump();
  const Estimator e = estimator_from_spec("@" + (dir / "est.json").string(), EstimatorRole::transmission, {},
                                          dir / "w", std::chrono::milliseconds(1));
  CHECK(e.inputs == std::vector<Channel>{Channel::ambient, Channel::flash_only});
  const auto g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
  CHECK_THROWS_AS(validate_two_stage(g_r, e), ContractViolation);
}

TEST_CASE("stage trace JSON keeps timings under meta") {
  const SynthSample s = aligned_sample(11, 64);
  const auto g_r = zero_estimator(EstimatorRole::reflection, default_inputs(EstimatorRole::reflection));
  const auto g_t = difference_estimator(EstimatorRole::transmission, default_inputs(EstimatorRole::transmission));
  const PipelineResult a = run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_r, g_t);
  const PipelineResult b = run_two_stage(LinearPair{s.ambient, s.flash, 1, 1}, g_r, g_t);
  nlohmann::json ja = to_json(a.trace), jb = to_json(b.trace);
  CHECK(ja.contains("meta"));
  ja.erase("meta");
  jb.erase("meta");
  CHECK(ja == jb);
  CHECK(ja.dump().find("millis") == std::string::npos);
}
