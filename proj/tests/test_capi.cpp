/* Copyright 2026 The histrack Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "histrack/histrack.h"

namespace fs = std::filesystem;

namespace {

const char* kSmall =
    "[model]\nfeature_dim = 16\nd_head = 2\nffn_dim = 16\nn_det = 4\nnum_decoders = 2\nimage_width = 16\n"
    "image_height = 16\n[scene]\nwidth = 16\nheight = 16\nmin_size = 3\nmax_size = 6\nmax_objects = 3\n"
    "length = 12\n[train]\nepochs = 1\nbatch_clips = 2\nclip_length = 3\n";

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / ("histrack_capi_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::string get_setting(const ht_settings* s, const char* key) {
  size_t needed = 0;
  EXPECT_EQ(ht_settings_get(s, key, nullptr, 0, &needed), HT_ERR_BUFFER);
  std::string buf(needed, '\0');
  EXPECT_EQ(ht_settings_get(s, key, buf.data(), buf.size(), &needed), HT_OK);
  buf.resize(needed - 1);
  return buf;
}

struct CApiFixture : ::testing::Test {
  ht_settings* settings = nullptr;
  ht_dataset* data = nullptr;
  void SetUp() override {
    ASSERT_EQ(ht_settings_parse(kSmall, &settings), HT_OK) << ht_last_error();
    ASSERT_EQ(ht_dataset_generate(settings, "val", 2, 5, &data), HT_OK) << ht_last_error();
  }
  void TearDown() override {
    ht_dataset_free(data);
    ht_settings_free(settings);
  }
};

TEST(CApi, VersionAndNullHandles) {
  EXPECT_NE(std::string(ht_version()), "");
  ht_settings* s = nullptr;
  EXPECT_EQ(ht_settings_parse(nullptr, &s), HT_ERR_ARGUMENT);
  EXPECT_NE(std::string(ht_last_error()), "");
  EXPECT_EQ(ht_settings_set(nullptr, "tracking.sigma", "0.5"), HT_ERR_ARGUMENT);
  int n = 0;
  EXPECT_EQ(ht_dataset_size(nullptr, &n), HT_ERR_ARGUMENT);
  EXPECT_EQ(ht_track(nullptr, nullptr, 0, nullptr), HT_ERR_ARGUMENT);
  ht_settings_free(nullptr);
  ht_model_free(nullptr);
}

TEST(CApi, SettingsStatusCodes) {
  ht_settings* s = nullptr;
  ASSERT_EQ(ht_settings_default(&s), HT_OK);
  EXPECT_EQ(ht_settings_set(s, "tracking.n_max", "5"), HT_OK);
  EXPECT_EQ(get_setting(s, "tracking.n_max"), "5");
  EXPECT_EQ(ht_settings_set(s, "tracking.n_max", "five"), HT_ERR_VALIDATION);
  EXPECT_EQ(ht_settings_set(s, "tracking.nope", "1"), HT_ERR_VALIDATION);
  size_t needed = 0;
  char small[4];
  EXPECT_EQ(ht_settings_text(s, small, sizeof small, &needed), HT_ERR_BUFFER);
  std::string text(needed, '\0');
  ASSERT_EQ(ht_settings_text(s, text.data(), text.size(), &needed), HT_OK);
  ht_settings* back = nullptr;
  ASSERT_EQ(ht_settings_parse(text.c_str(), &back), HT_OK);
  EXPECT_EQ(get_setting(back, "tracking.n_max"), "5");
  ht_settings_free(back);
  ht_settings_free(s);
  EXPECT_EQ(ht_settings_load("/nonexistent.ini", &s), HT_ERR_IO);
  EXPECT_EQ(ht_settings_parse("[model]\nd_head = 7\n", &s), HT_ERR_VALIDATION);
}

TEST_F(CApiFixture, DatasetRoundTrip) {
  int n = 0, len = 0;
  ASSERT_EQ(ht_dataset_size(data, &n), HT_OK);
  EXPECT_EQ(n, 2);
  ASSERT_EQ(ht_dataset_video_length(data, 0, &len), HT_OK);
  EXPECT_EQ(len, 12);
  EXPECT_EQ(ht_dataset_video_length(data, 2, &len), HT_ERR_ARGUMENT);
  const fs::path dir = scratch();
  const std::string path = (dir / "d.htds").string();
  ASSERT_EQ(ht_dataset_save(data, path.c_str()), HT_OK);
  ht_dataset* loaded = nullptr;
  ASSERT_EQ(ht_dataset_load(path.c_str(), &loaded), HT_OK);
  std::uint64_t a = 0, b = 0;
  ht_dataset_fingerprint(data, &a);
  ht_dataset_fingerprint(loaded, &b);
  EXPECT_EQ(a, b);
  ht_dataset_free(loaded);
  ht_dataset* down = nullptr;
  ASSERT_EQ(ht_dataset_downsample(data, 5, &down), HT_OK);
  ht_dataset_video_length(down, 0, &len);
  EXPECT_EQ(len, 3);
  ht_dataset_free(down);
  EXPECT_EQ(ht_dataset_downsample(data, 0, &down), HT_ERR_VALIDATION);
  std::FILE* f = std::fopen(path.c_str(), "wb");
  std::fputs("garbage", f);
  std::fclose(f);
  EXPECT_EQ(ht_dataset_load(path.c_str(), &loaded), HT_ERR_FORMAT);
  EXPECT_EQ(ht_dataset_load((dir / "missing").string().c_str(), &loaded), HT_ERR_IO);
  EXPECT_EQ(ht_dataset_load_mot((dir / "missing").string().c_str(), settings, &loaded), HT_ERR_IO);
  fs::remove_all(dir);
}

TEST_F(CApiFixture, TrainTrackEvaluate) {
  int calls = 0;
  ht_model* model = nullptr;
  ASSERT_EQ(ht_model_train(
                settings, data, [](void* u, int, int, double, double, double) { ++*static_cast<int*>(u); }, &calls,
                &model),
            HT_OK)
      << ht_last_error();
  EXPECT_GT(calls, 0);
  EXPECT_EQ(ht_model_check(model, settings), HT_OK);
  size_t needed = 0;
  EXPECT_EQ(ht_model_loss_curve(model, nullptr, 0, &needed), HT_ERR_BUFFER);
  EXPECT_GT(needed, 1u);

  const fs::path dir = scratch();
  const std::string ck = (dir / "m.ckpt").string();
  ASSERT_EQ(ht_model_save(model, ck.c_str()), HT_OK);
  ht_model* loaded = nullptr;
  ASSERT_EQ(ht_model_load(ck.c_str(), &loaded), HT_OK);
  std::uint64_t fa = 0, fb = 0;
  ht_model_fingerprint(model, &fa);
  ht_model_fingerprint(loaded, &fb);
  EXPECT_EQ(fa, fb);
  EXPECT_EQ(ht_model_set(loaded, "tracking.sigma", "0.3"), HT_OK);
  EXPECT_EQ(ht_model_set(loaded, "model.feature_dim", "8"), HT_ERR_VALIDATION);

  ht_settings* other = nullptr;
  ASSERT_EQ(ht_settings_default(&other), HT_OK);
  EXPECT_EQ(ht_model_check(model, other), HT_ERR_VALIDATION);
  ht_settings_free(other);

  std::vector<ht_trackfile*> tracks(2, nullptr);
  for (int v = 0; v < 2; ++v) ASSERT_EQ(ht_track(loaded, data, v, &tracks[static_cast<size_t>(v)]), HT_OK);
  EXPECT_EQ(ht_track(loaded, data, 2, &tracks[0]), HT_ERR_ARGUMENT);
  int dup = 1;
  ht_trackfile_has_duplicates(tracks[0], &dup);
  EXPECT_EQ(dup, 0);

  const std::string tf = (dir / "v.txt").string();
  ASSERT_EQ(ht_trackfile_save(tracks[0], tf.c_str()), HT_OK);
  ht_trackfile* reread = nullptr;
  ASSERT_EQ(ht_trackfile_load(tf.c_str(), &reread), HT_OK);
  int ra = 0, rb = 0;
  ht_trackfile_rows(tracks[0], &ra);
  ht_trackfile_rows(reread, &rb);
  EXPECT_EQ(ra, rb);
  ht_trackfile_free(reread);

  ht_report* report = nullptr;
  ASSERT_EQ(ht_evaluate(tracks.data(), 2, data, &report), HT_OK);
  double hota = -1, gt = 0, pred = -1;
  ASSERT_EQ(ht_report_get(report, "hota", &hota), HT_OK);
  ht_report_get(report, "gt_count", &gt);
  ht_report_get(report, "pred_count", &pred);
  EXPECT_GE(hota, 0.0);
  EXPECT_LE(hota, 1.0);
  EXPECT_GT(gt, 0.0);
  EXPECT_EQ(pred, static_cast<double>(ra + [&] { int n = 0; ht_trackfile_rows(tracks[1], &n); return n; }()));
  EXPECT_EQ(ht_report_get(report, "nope", &hota), HT_ERR_ARGUMENT);
  EXPECT_EQ(ht_report_json(report, nullptr, 0, &needed), HT_ERR_BUFFER);
  ht_report_free(report);
  EXPECT_EQ(ht_evaluate(tracks.data(), 1, data, &report), HT_ERR_VALIDATION);

  std::FILE* f = std::fopen(tf.c_str(), "w");
  std::fputs("1,2,x\n", f);
  std::fclose(f);
  EXPECT_EQ(ht_trackfile_load(tf.c_str(), &reread), HT_ERR_FORMAT);

  for (auto* t : tracks) ht_trackfile_free(t);
  ht_model_free(loaded);
  ht_model_free(model);
  fs::remove_all(dir);
}

TEST(CApi, EquivalentFps) {
  double out = 0;
  ASSERT_EQ(ht_equivalent_fps(10.8, 3, &out), HT_OK);
  EXPECT_NEAR(out, 32.4, 1e-12);
  EXPECT_EQ(ht_equivalent_fps(10.8, 0, &out), HT_ERR_ARGUMENT);
}

}  // namespace
