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

#include "histrack/histrack.h"

#include <cstring>
#include <exception>
#include <memory>
#include <sstream>
#include <string>


#include "histrack/binio.hpp"
#include "histrack/checkpoint.hpp"
#include "histrack/metrics.hpp"
#include "histrack/model.hpp"
#include "histrack/settings.hpp"
#include "histrack/synthgen.hpp"
#include "histrack/trackfile.hpp"
#include "histrack/tracker.hpp"
#include "histrack/trainer.hpp"

struct ht_settings {
  histrack::Settings value;
};
struct ht_dataset {
  histrack::Dataset value;
};
struct ht_model {
  histrack::Config config;
  histrack::ad::ParamStore params;
  std::string loss_curve;  // CSV, empty for loaded models
};
struct ht_trackfile {
  histrack::TrackFile value;
};
struct ht_report {
  histrack::MetricReport value;
};

namespace {

thread_local std::string g_last_error;

ht_status fail(ht_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename F>
ht_status guard(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const histrack::ValidationError& e) {
    return fail(HT_ERR_VALIDATION, e.what());
  } catch (const histrack::IoError& e) {
    return fail(HT_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(HT_ERR_ARGUMENT, e.what());
  } catch (const std::runtime_error& e) {
    return fail(HT_ERR_FORMAT, e.what());
  } catch (const std::exception& e) {
    return fail(HT_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HT_ERR_INTERNAL, "unknown error");
  }
}

ht_status copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed != nullptr) *needed = s.size() + 1;
  if (buf == nullptr || cap < s.size() + 1) {
    return fail(HT_ERR_BUFFER, "buffer of " + std::to_string(cap) + " bytes, need " + std::to_string(s.size() + 1));
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return HT_OK;
}

#define HT_REQUIRE(cond, what) \
  if (!(cond)) return fail(HT_ERR_ARGUMENT, what)

const histrack::VideoItem* video_at(const ht_dataset* d, int index) {
  if (d == nullptr || index < 0 || index >= static_cast<int>(d->value.videos.size())) return nullptr;
  return &d->value.videos[static_cast<std::size_t>(index)];
}

}  // namespace

extern "C" {

const char* ht_last_error(void) { return g_last_error.c_str(); }

const char* ht_version(void) { return "0.1.0"; }

ht_status ht_settings_default(ht_settings** out) {
  return guard([&] {
    HT_REQUIRE(out != nullptr, "null output");
    *out = new ht_settings{};
    return HT_OK;
  });
}

ht_status ht_settings_load(const char* path, ht_settings** out) {
  return guard([&] {
    HT_REQUIRE(path != nullptr && out != nullptr, "null argument");
    *out = new ht_settings{histrack::load_settings(path)};
    return HT_OK;
  });
}

ht_status ht_settings_parse(const char* text, ht_settings** out) {
  return guard([&] {
    HT_REQUIRE(text != nullptr && out != nullptr, "null argument");
    *out = new ht_settings{histrack::parse_settings(text)};
    return HT_OK;
  });
}

ht_status ht_settings_set(ht_settings* s, const char* key, const char* value) {
  return guard([&] {
    HT_REQUIRE(s != nullptr && key != nullptr && value != nullptr, "null argument");
    histrack::Settings copy = s->value;
    copy.set(key, value);
    copy.validate();
    s->value = std::move(copy);
    return HT_OK;
  });
}

ht_status ht_settings_get(const ht_settings* s, const char* key, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    HT_REQUIRE(s != nullptr && key != nullptr, "null argument");
    for (const auto& [k, v] : s->value.to_pairs()) {
      if (k == key) return copy_out(v, buf, cap, needed);
    }
    return fail(HT_ERR_VALIDATION, std::string("unknown key '") + key + "'");
  });
}

ht_status ht_settings_text(const ht_settings* s, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    HT_REQUIRE(s != nullptr, "null settings");
    return copy_out(histrack::format_settings(s->value), buf, cap, needed);
  });
}

void ht_settings_free(ht_settings* s) { delete s; }

ht_status ht_dataset_generate(const ht_settings* s, const char* split, int count, uint64_t seed, ht_dataset** out) {
  return guard([&] {
    HT_REQUIRE(s != nullptr && split != nullptr && out != nullptr, "null argument");
    if (count < 0) return fail(HT_ERR_VALIDATION, "video count must be >= 0");
    *out = new ht_dataset{histrack::generate_dataset(s->value.scene, count, seed, split)};
    return HT_OK;
  });
}

ht_status ht_dataset_load(const char* path, ht_dataset** out) {
  return guard([&] {
    HT_REQUIRE(path != nullptr && out != nullptr, "null argument");
    *out = new ht_dataset{histrack::load_dataset(path)};
    return HT_OK;
  });
}

ht_status ht_dataset_load_mot(const char* dir, const ht_settings* s, ht_dataset** out) {
  return guard([&] {
    HT_REQUIRE(dir != nullptr && s != nullptr && out != nullptr, "null argument");
    histrack::Dataset d;
    d.split = "mot";
    d.videos.push_back(histrack::load_motchallenge(dir, s->value.config.image_width, s->value.config.image_height));
    *out = new ht_dataset{std::move(d)};
    return HT_OK;
  });
}

ht_status ht_dataset_save(const ht_dataset* d, const char* path) {
  return guard([&] {
    HT_REQUIRE(d != nullptr && path != nullptr, "null argument");
    histrack::save_dataset(path, d->value);
    return HT_OK;
  });
}

ht_status ht_dataset_downsample(const ht_dataset* d, int n, ht_dataset** out) {
  return guard([&] {
    HT_REQUIRE(d != nullptr && out != nullptr, "null argument");
    histrack::Dataset r;
    r.split = d->value.split;
    for (const auto& v : d->value.videos) r.videos.push_back(histrack::downsample(v, n));
    *out = new ht_dataset{std::move(r)};
    return HT_OK;
  });
}

ht_status ht_dataset_size(const ht_dataset* d, int* count) {
  return guard([&] {
    HT_REQUIRE(d != nullptr && count != nullptr, "null argument");
    *count = static_cast<int>(d->value.videos.size());
    return HT_OK;
  });
}

ht_status ht_dataset_video_name(const ht_dataset* d, int index, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    const auto* v = video_at(d, index);
    HT_REQUIRE(v != nullptr, "video index out of range");
    return copy_out(v->name, buf, cap, needed);
  });
}

ht_status ht_dataset_video_length(const ht_dataset* d, int index, int* frames) {
  return guard([&] {
    const auto* v = video_at(d, index);
    HT_REQUIRE(v != nullptr && frames != nullptr, "video index out of range");
    *frames = v->length();
    return HT_OK;
  });
}

ht_status ht_dataset_fingerprint(const ht_dataset* d, uint64_t* out) {
  return guard([&] {
    HT_REQUIRE(d != nullptr && out != nullptr, "null argument");
    *out = histrack::fingerprint(d->value);
    return HT_OK;
  });
}

void ht_dataset_free(ht_dataset* d) { delete d; }

ht_status ht_model_train(const ht_settings* s, const ht_dataset* train, ht_progress_fn progress, void* user,
                         ht_model** out) {
  return guard([&] {
    HT_REQUIRE(s != nullptr && train != nullptr && out != nullptr, "null argument");
    s->value.validate();
    std::ostringstream curve;
    curve.precision(10);
    curve << "step,epoch,learning_rate,loss,bip_class,bip_l1,bip_giou,toc,proposal\n";
    histrack::TrainOptions options;
    options.on_step = [&](const histrack::TrainProgress& p) {
      curve << p.step << ',' << p.epoch << ',' << p.learning_rate << ',' << p.loss << ',' << p.breakdown.bip_class
            << ',' << p.breakdown.bip_l1 << ',' << p.breakdown.bip_giou << ',' << p.breakdown.toc << ','
            << p.proposal << '\n';
      if (progress != nullptr) progress(user, p.step, p.total_steps, p.loss, p.breakdown.toc, p.learning_rate);
    };
    histrack::TrainResult r = histrack::train(s->value.config, train->value, options);
    *out = new ht_model{s->value.config, std::move(r.params), curve.str()};
    return HT_OK;
  });
}

ht_status ht_model_init(const ht_settings* s, uint64_t seed, ht_model** out) {
  return guard([&] {
    HT_REQUIRE(s != nullptr && out != nullptr, "null argument");
    s->value.config.validate();
    *out = new ht_model{s->value.config, histrack::init_params(s->value.config, seed), {}};
    return HT_OK;
  });
}

ht_status ht_model_load(const char* path, ht_model** out) {
  return guard([&] {
    HT_REQUIRE(path != nullptr && out != nullptr, "null argument");
    histrack::Checkpoint ck = histrack::load_checkpoint(path);
    *out = new ht_model{ck.config, std::move(ck.params), {}};
    return HT_OK;
  });
}

ht_status ht_model_save(const ht_model* m, const char* path) {
  return guard([&] {
    HT_REQUIRE(m != nullptr && path != nullptr, "null argument");
    histrack::save_checkpoint(path, m->config, m->params);
    return HT_OK;
  });
}

ht_status ht_model_set(ht_model* m, const char* key, const char* value) {
  return guard([&] {
    HT_REQUIRE(m != nullptr && key != nullptr && value != nullptr, "null argument");
    const std::string k = key;
    if (k.rfind("tracking.", 0) != 0) {
      return fail(HT_ERR_VALIDATION, "only tracking.* settings can change after training, got '" + k + "'");
    }
    histrack::Config c = m->config;
    c.set(k, value);
    c.validate();
    m->config = c;
    return HT_OK;
  });
}

ht_status ht_model_get(const ht_model* m, const char* key, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    HT_REQUIRE(m != nullptr && key != nullptr, "null argument");
    return copy_out(m->config.get(key), buf, cap, needed);
  });
}

ht_status ht_model_check(const ht_model* m, const ht_settings* s) {
  return guard([&] {
    HT_REQUIRE(m != nullptr && s != nullptr, "null argument");
    const auto& a = m->config;
    const auto& b = s->value.config;
    for (const auto& [k, v] : a.to_pairs()) {
      if (k.rfind("model.", 0) == 0 && b.get(k) != v) {
        return fail(HT_ERR_VALIDATION, "checkpoint has " + k + " = " + v + ", settings ask for " + b.get(k));
      }
    }
    histrack::check_params(b, m->params);
    return HT_OK;
  });
}

ht_status ht_model_fingerprint(const ht_model* m, uint64_t* out) {
  return guard([&] {
    HT_REQUIRE(m != nullptr && out != nullptr, "null argument");
    *out = histrack::binio::fnv1a(histrack::serialize_checkpoint(m->config, m->params));
    return HT_OK;
  });
}

ht_status ht_model_loss_curve(const ht_model* m, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    HT_REQUIRE(m != nullptr, "null model");
    return copy_out(m->loss_curve, buf, cap, needed);
  });
}

void ht_model_free(ht_model* m) { delete m; }

ht_status ht_track(const ht_model* m, const ht_dataset* d, int video, ht_trackfile** out) {
  return guard([&] {
    const auto* v = video_at(d, video);
    HT_REQUIRE(m != nullptr && out != nullptr, "null argument");
    HT_REQUIRE(v != nullptr, "video index out of range");
    *out = new ht_trackfile{histrack::run(*v, m->params, m->config)};
    return HT_OK;
  });
}

ht_status ht_trackfile_load(const char* path, ht_trackfile** out) {
  return guard([&] {
    HT_REQUIRE(path != nullptr && out != nullptr, "null argument");
    histrack::TrackFile f = histrack::load_trackfile(path);
    f.normalize_order();
    *out = new ht_trackfile{std::move(f)};
    return HT_OK;
  });
}

ht_status ht_trackfile_save(const ht_trackfile* t, const char* path) {
  return guard([&] {
    HT_REQUIRE(t != nullptr && path != nullptr, "null argument");
    histrack::save_trackfile(path, t->value);
    return HT_OK;
  });
}

ht_status ht_trackfile_text(const ht_trackfile* t, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    HT_REQUIRE(t != nullptr, "null track file");
    return copy_out(histrack::format_trackfile(t->value), buf, cap, needed);
  });
}

ht_status ht_trackfile_rows(const ht_trackfile* t, int* rows) {
  return guard([&] {
    HT_REQUIRE(t != nullptr && rows != nullptr, "null argument");
    *rows = static_cast<int>(t->value.rows.size());
    return HT_OK;
  });
}

ht_status ht_trackfile_has_duplicates(const ht_trackfile* t, int* duplicates) {
  return guard([&] {
    HT_REQUIRE(t != nullptr && duplicates != nullptr, "null argument");
    *duplicates = t->value.has_duplicates() ? 1 : 0;
    return HT_OK;
  });
}

void ht_trackfile_free(ht_trackfile* t) { delete t; }

ht_status ht_evaluate(const ht_trackfile* const* preds, int count, const ht_dataset* gt, ht_report** out) {
  return guard([&] {
    HT_REQUIRE(preds != nullptr && gt != nullptr && out != nullptr, "null argument");
    if (count != static_cast<int>(gt->value.videos.size())) {
      return fail(HT_ERR_VALIDATION, std::to_string(count) + " track files for " +
                                         std::to_string(gt->value.videos.size()) + " videos");
    }
    histrack::MetricAccumulator acc;
    for (int i = 0; i < count; ++i) {
      HT_REQUIRE(preds[i] != nullptr, "null track file");
      const auto& v = gt->value.videos[static_cast<std::size_t>(i)];
      acc.add(histrack::pred_sequence(preds[i]->value, v.length(), v.native_width, v.native_height),
              histrack::gt_sequence(v));
    }
    *out = new ht_report{acc.report()};
    return HT_OK;
  });
}

ht_status ht_report_get(const ht_report* r, const char* metric, double* value) {
  return guard([&] {
    HT_REQUIRE(r != nullptr && metric != nullptr && value != nullptr, "null argument");
    const auto& v = r->value;
    const std::string m = metric;
    if (m == "hota") *value = v.hota;
    else if (m == "det_a") *value = v.det_a;
    else if (m == "ass_a") *value = v.ass_a;
    else if (m == "idf1") *value = v.idf1;
    else if (m == "mota") *value = v.mota;
    else if (m == "fp") *value = static_cast<double>(v.fp);
    else if (m == "fn") *value = static_cast<double>(v.fn);
    else if (m == "idsw") *value = static_cast<double>(v.idsw);
    else if (m == "gt_count") *value = static_cast<double>(v.gt_count);
    else if (m == "pred_count") *value = static_cast<double>(v.pred_count);
    else return fail(HT_ERR_ARGUMENT, "unknown metric '" + m + "'");
    return HT_OK;
  });
}

ht_status ht_report_json(const ht_report* r, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    HT_REQUIRE(r != nullptr, "null report");
    return copy_out(r->value.to_json(), buf, cap, needed);
  });
}

void ht_report_free(ht_report* r) { delete r; }

ht_status ht_equivalent_fps(double fps, int n, double* out) {
  return guard([&] {
    HT_REQUIRE(out != nullptr, "null output");
    *out = histrack::equivalent_fps(fps, n);
    return HT_OK;
  });
}

}  // extern "C"
