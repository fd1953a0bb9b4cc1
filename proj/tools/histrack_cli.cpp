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

// histrack command line: gen | train | track | eval | sweep | rerun.
// Talks to the library only through the C interface.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "histrack/histrack.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitValidation = 2;

struct Failure {
  ht_status status;
  std::string message;
};

void check(ht_status s, const std::string& what) {
  if (s != HT_OK) throw Failure{s, what + ": " + ht_last_error()};
}

template <typename F>
std::string read_string(F&& call, const std::string& what) {
  size_t needed = 0;
  ht_status s = call(nullptr, 0, &needed);
  if (s != HT_ERR_BUFFER && s != HT_OK) check(s, what);
  std::string out(needed, '\0');
  check(call(out.data(), out.size(), &needed), what);
  out.resize(needed - 1);
  return out;
}

// RAII wrappers over the opaque handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  explicit Handle(T* raw) : p(raw) {}
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& o) noexcept : p(o.p) { o.p = nullptr; }
  ~Handle() {
    if (p != nullptr) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Settings = Handle<ht_settings, ht_settings_free>;
using Dataset = Handle<ht_dataset, ht_dataset_free>;
using Model = Handle<ht_model, ht_model_free>;
using Tracks = Handle<ht_trackfile, ht_trackfile_free>;
using Report = Handle<ht_report, ht_report_free>;

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string hex(uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

Settings load_settings(const std::string& path) {
  Settings s;
  if (path.empty()) check(ht_settings_default(s.out()), "default settings");
  else check(ht_settings_load(path.c_str(), s.out()), "settings");
  return s;
}

std::string setting(const Settings& s, const std::string& key) {
  return read_string([&](char* b, size_t c, size_t* n) { return ht_settings_get(s.get(), key.c_str(), b, c, n); },
                     key);
}

std::string settings_text(const Settings& s) {
  return read_string([&](char* b, size_t c, size_t* n) { return ht_settings_text(s.get(), b, c, n); }, "settings");
}

uint64_t dataset_fingerprint(const Dataset& d) {
  uint64_t f = 0;
  check(ht_dataset_fingerprint(d.get(), &f), "fingerprint");
  return f;
}

int dataset_size(const Dataset& d) {
  int n = 0;
  check(ht_dataset_size(d.get(), &n), "dataset");
  return n;
}

std::string video_name(const Dataset& d, int i) {
  return read_string([&](char* b, size_t c, size_t* n) { return ht_dataset_video_name(d.get(), i, b, c, n); },
                     "video name");
}

Dataset load_data(const std::string& data, const std::string& mot, const Settings& s) {
  Dataset d;
  if (!mot.empty()) check(ht_dataset_load_mot(mot.c_str(), s.get(), d.out()), "MOT sequence " + mot);
  else check(ht_dataset_load(data.c_str(), d.out()), "dataset " + data);
  return d;
}

Dataset downsample(const Dataset& d, int n) {
  Dataset out;
  check(ht_dataset_downsample(d.get(), n, out.out()), "downsample");
  return out;
}

Model load_model(const std::string& path) {
  Model m;
  check(ht_model_load(path.c_str(), m.out()), "checkpoint " + path);
  return m;
}

std::string model_get(const Model& m, const std::string& key) {
  return read_string([&](char* b, size_t c, size_t* n) { return ht_model_get(m.get(), key.c_str(), b, c, n); }, key);
}

std::vector<Tracks> track_all(const Model& m, const Dataset& d) {
  std::vector<Tracks> out;
  for (int i = 0; i < dataset_size(d); ++i) {
    Tracks t;
    check(ht_track(m.get(), d.get(), i, t.out()), "track " + video_name(d, i));
    out.push_back(std::move(t));
  }
  return out;
}

Report evaluate(const std::vector<Tracks>& tracks, const Dataset& gt) {
  std::vector<const ht_trackfile*> raw;
  for (const auto& t : tracks) raw.push_back(t.get());
  Report r;
  check(ht_evaluate(raw.data(), static_cast<int>(raw.size()), gt.get(), r.out()), "evaluate");
  return r;
}

double metric(const Report& r, const char* name) {
  double v = 0;
  check(ht_report_get(r.get(), name, &v), name);
  return v;
}

json report_json(const Report& r) {
  return json::parse(
      read_string([&](char* b, size_t c, size_t* n) { return ht_report_json(r.get(), b, c, n); }, "report"));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw Failure{HT_ERR_IO, "cannot write " + path.string()};
}

struct Manifest {
  json doc;
  fs::path dir;

  Manifest(const std::string& command, const std::vector<std::string>& argv, const fs::path& out_dir)
      : dir(out_dir) {
    doc["command"] = command;
    doc["argv"] = argv;
    doc["library_version"] = ht_version();
    doc["started"] = now_utc();
  }
  void write() {
    doc["finished"] = now_utc();
    fs::create_directories(dir);
    write_text(dir / ("manifest_" + doc["command"].get<std::string>() + ".json"), doc.dump(2) + "\n");
  }
};

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Failure{HT_ERR_VALIDATION, "not an integer list: '" + s + "'"};
    }
  }
  if (out.empty()) throw Failure{HT_ERR_VALIDATION, "empty integer list"};
  return out;
}

// Line chart of one metric against the interval n, one series per label.
std::string svg_plot(const std::string& title, const std::string& metric_name,
                     const std::map<std::string, std::vector<std::pair<int, double>>>& series) {
  const double W = 640, H = 400, L = 60, R = 190, T = 40, B = 50;
  int n_max = 1;
  for (const auto& [label, pts] : series) {
    for (const auto& [n, v] : pts) n_max = std::max(n_max, n);
  }
  auto x = [&](double n) { return L + (W - L - R) * (n_max > 1 ? (n - 1) / (n_max - 1) : 0.5); };
  auto y = [&](double v) { return H - B - (H - T - B) * std::clamp(v, 0.0, 1.0); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::ostringstream o;
  o << std::fixed << std::setprecision(1);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 - 60 << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    o << "<line x1=\"" << L - 4 << "\" y1=\"" << y(v) << "\" x2=\"" << W - R << "\" y2=\"" << y(v)
      << "\" stroke=\"#ddd\"/><text x=\"" << L - 36 << "\" y=\"" << y(v) + 4 << "\">" << std::setprecision(1) << v
      << "</text>\n";
  }
  std::vector<int> ticks;
  for (const auto& [label, pts] : series) {
    for (const auto& [n, v] : pts) ticks.push_back(n);
  }
  std::sort(ticks.begin(), ticks.end());
  ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
  for (int n : ticks) {
    o << "<text x=\"" << x(n) - 4 << "\" y=\"" << H - B + 18 << "\">" << n << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 - 70 << "\" y=\"" << H - 12 << "\">sampling interval n</text>\n";
  o << "<text x=\"14\" y=\"" << T - 10 << "\">" << metric_name << "</text>\n";
  int k = 0;
  for (const auto& [label, pts] : series) {
    const char* c = colors[k % 7];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (const auto& [n, v] : pts) o << x(n) << ',' << y(v) << ' ';
    o << "\"/>\n";
    for (const auto& [n, v] : pts) o << "<circle cx=\"" << x(n) << "\" cy=\"" << y(v) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
    o << "<rect x=\"" << W - R + 12 << "\" y=\"" << T + 18 * k << "\" width=\"12\" height=\"12\" fill=\"" << c
      << "\"/><text x=\"" << W - R + 30 << "\" y=\"" << T + 18 * k + 11 << "\">" << label << "</text>\n";
    ++k;
  }
  o << "</svg>\n";
  return o.str();
}

struct Options {
  std::string config;
  std::string out;
  std::string data;
  std::string mot;
  std::string tracks;
  std::vector<std::string> checkpoints;
  std::string n_list = "1";
  std::string n_max_list;
  int64_t seed = -1;
  int n = 1;
  int n_max = 0;
  bool quiet = false;
};

int cmd_gen(const Options& o, Manifest& man) {
  Settings s = load_settings(o.config);
  const uint64_t seed = o.seed >= 0 ? static_cast<uint64_t>(o.seed) : std::stoull(setting(s, "data.seed"));
  const int n_train = std::stoi(setting(s, "data.train_videos"));
  const int n_val = std::stoi(setting(s, "data.val_videos"));
  fs::create_directories(o.out);
  json sets = json::object();
  const std::pair<const char*, std::pair<int, uint64_t>> splits[] = {{"train", {n_train, seed}},
                                                                     {"val", {n_val, seed + 1000003}}};
  for (const auto& [split, spec] : splits) {
    Dataset d;
    check(ht_dataset_generate(s.get(), split, spec.first, spec.second, d.out()), "generate");
    const fs::path path = fs::path(o.out) / (std::string(split) + ".htds");
    check(ht_dataset_save(d.get(), path.string().c_str()), "save");
    sets[split] = {{"path", path.string()}, {"videos", spec.first}, {"seed", spec.second},
                   {"fingerprint", hex(dataset_fingerprint(d))}};
    std::cout << split << ": " << spec.first << " videos -> " << path.string() << "\n";
  }
  man.doc["settings"] = settings_text(s);
  man.doc["datasets"] = sets;
  return 0;
}

int cmd_train(const Options& o, Manifest& man) {
  Settings s = load_settings(o.config);
  if (o.seed >= 0) check(ht_settings_set(s.get(), "train.seed", std::to_string(o.seed).c_str()), "seed");
  if (o.n_max > 0) check(ht_settings_set(s.get(), "tracking.n_max", std::to_string(o.n_max).c_str()), "n_max");
  Dataset d = load_data(o.data, "", s);
  fs::create_directories(o.out);
  Model m;
  struct Ctx {
    bool quiet;
  } ctx{o.quiet};
  auto progress = [](void* user, int step, int total, double loss, double toc, double lr) {
    if (static_cast<Ctx*>(user)->quiet) return;
    if (step == 1 || step % 25 == 0 || step == total) {
      std::printf("step %5d/%d  loss %9.4f  toc %8.4f  lr %.2e\n", step, total, loss, toc, lr);
      std::fflush(stdout);
    }
  };
  check(ht_model_train(s.get(), d.get(), progress, &ctx, m.out()), "train");
  const fs::path ck = fs::path(o.out) / "model.ckpt";
  check(ht_model_save(m.get(), ck.string().c_str()), "save checkpoint");
  write_text(fs::path(o.out) / "loss_curve.csv",
             read_string([&](char* b, size_t c, size_t* n) { return ht_model_loss_curve(m.get(), b, c, n); }, "curve"));
  uint64_t fp = 0;
  check(ht_model_fingerprint(m.get(), &fp), "fingerprint");
  man.doc["settings"] = settings_text(s);
  man.doc["seeds"] = {{"train", std::stoull(setting(s, "train.seed"))}};
  man.doc["dataset"] = {{"path", o.data}, {"fingerprint", hex(dataset_fingerprint(d))}};
  man.doc["checkpoint"] = {{"path", ck.string()}, {"fingerprint", hex(fp)}};
  std::cout << "checkpoint -> " << ck.string() << "\n";
  return 0;
}

int cmd_track(const Options& o, Manifest& man) {
  Settings s = load_settings(o.config);
  Model m = load_model(o.checkpoints.front());
  if (!o.config.empty()) check(ht_model_check(m.get(), s.get()), "checkpoint vs settings");
  if (o.n_max > 0) check(ht_model_set(m.get(), "tracking.n_max", std::to_string(o.n_max).c_str()), "n_max");
  Dataset full = load_data(o.data, o.mot, s);
  Dataset d = downsample(full, o.n);
  fs::create_directories(o.out);
  json files = json::array();
  for (int i = 0; i < dataset_size(d); ++i) {
    Tracks t;
    check(ht_track(m.get(), d.get(), i, t.out()), "track");
    const fs::path path = fs::path(o.out) / (video_name(d, i) + ".txt");
    check(ht_trackfile_save(t.get(), path.string().c_str()), "save tracks");
    files.push_back(path.string());
  }
  uint64_t fp = 0;
  check(ht_model_fingerprint(m.get(), &fp), "fingerprint");
  man.doc["checkpoint"] = {{"path", o.checkpoints.front()}, {"fingerprint", hex(fp)}};
  man.doc["dataset"] = {{"path", o.mot.empty() ? o.data : o.mot}, {"fingerprint", hex(dataset_fingerprint(full))}};
  man.doc["n"] = o.n;
  man.doc["n_max"] = std::stoi(model_get(m, "tracking.n_max"));
  man.doc["outputs"] = files;
  std::cout << files.size() << " track files -> " << o.out << "\n";
  return 0;
}

void print_row(std::ostream& out, const std::vector<std::string>& cells, const std::vector<int>& widths) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << std::setw(widths[i]) << cells[i] << (i + 1 < cells.size() ? "  " : "\n");
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

int cmd_eval(const Options& o, Manifest& man) {
  Settings s = load_settings(o.config);
  Dataset full = load_data(o.data, o.mot, s);
  Dataset gt = downsample(full, o.n);
  std::vector<Tracks> tracks;
  for (int i = 0; i < dataset_size(gt); ++i) {
    const fs::path path = fs::path(o.tracks) / (video_name(gt, i) + ".txt");
    Tracks t;
    check(ht_trackfile_load(path.string().c_str(), t.out()), "track file");
    tracks.push_back(std::move(t));
  }
  Report r = evaluate(tracks, gt);
  const std::vector<int> w{8, 8, 8, 8, 8, 8, 7, 7, 6};
  print_row(std::cout, {"HOTA", "DetA", "AssA", "IDF1", "MOTA", "n", "FP", "FN", "IDSW"}, w);
  print_row(std::cout,
            {fmt(metric(r, "hota")), fmt(metric(r, "det_a")), fmt(metric(r, "ass_a")), fmt(metric(r, "idf1")),
             fmt(metric(r, "mota")), std::to_string(o.n), fmt(metric(r, "fp"), 0), fmt(metric(r, "fn"), 0),
             fmt(metric(r, "idsw"), 0)},
            w);
  fs::create_directories(o.out);
  json rep = report_json(r);
  write_text(fs::path(o.out) / "metrics.json", rep.dump(2) + "\n");
  man.doc["dataset"] = {{"path", o.mot.empty() ? o.data : o.mot}, {"fingerprint", hex(dataset_fingerprint(full))}};
  man.doc["tracks"] = o.tracks;
  man.doc["n"] = o.n;
  man.doc["metrics"] = rep;
  return 0;
}

int cmd_sweep(const Options& o, Manifest& man) {
  Settings s = load_settings(o.config);
  Dataset full = load_data(o.data, o.mot, s);
  const std::vector<int> ns = parse_list(o.n_list);
  json rows = json::array();
  json checkpoints = json::array();
  std::map<std::string, std::vector<std::pair<int, double>>> idf1_series, hota_series;
  std::ostringstream csv;
  csv << "checkpoint,irm_count,n_max,n,hota,det_a,ass_a,idf1,mota,fp,fn,idsw\n";
  const std::vector<int> w{14, 9, 5, 3, 7, 7, 7, 7, 6};
  print_row(std::cout, {"checkpoint", "irm_count", "n_max", "n", "HOTA", "IDF1", "MOTA", "AssA", "IDSW"}, w);

  std::vector<Dataset> sampled;
  for (int n : ns) sampled.push_back(downsample(full, n));
  for (std::size_t c = 0; c < o.checkpoints.size(); ++c) {
    Model m = load_model(o.checkpoints[c]);
    if (!o.config.empty()) check(ht_model_check(m.get(), s.get()), "checkpoint vs settings");
    uint64_t fp = 0;
    check(ht_model_fingerprint(m.get(), &fp), "fingerprint");
    checkpoints.push_back({{"path", o.checkpoints[c]}, {"fingerprint", hex(fp)}});
    const std::string label = fs::path(o.checkpoints[c]).parent_path().filename().string().empty()
                                  ? "ckpt" + std::to_string(c)
                                  : fs::path(o.checkpoints[c]).parent_path().filename().string();
    const std::string irm = model_get(m, "model.irm_count");
    const int irm_count = std::stoi(irm) < 0 ? std::stoi(model_get(m, "model.num_decoders")) - 1 : std::stoi(irm);
    std::vector<int> n_maxes = o.n_max_list.empty() ? std::vector<int>{std::stoi(model_get(m, "tracking.n_max"))}
                                                    : parse_list(o.n_max_list);
    for (int k : n_maxes) {
      check(ht_model_set(m.get(), "tracking.n_max", std::to_string(k).c_str()), "n_max");
      const std::string series = label + " irm=" + std::to_string(irm_count) + " nmax=" + std::to_string(k);
      for (std::size_t i = 0; i < ns.size(); ++i) {
        Report r = evaluate(track_all(m, sampled[i]), sampled[i]);
        const double hota = metric(r, "hota"), idf1 = metric(r, "idf1");
        idf1_series[series].emplace_back(ns[i], idf1);
        hota_series[series].emplace_back(ns[i], hota);
        print_row(std::cout,
                  {label, std::to_string(irm_count), std::to_string(k), std::to_string(ns[i]), fmt(hota), fmt(idf1),
                   fmt(metric(r, "mota")), fmt(metric(r, "ass_a")), fmt(metric(r, "idsw"), 0)},
                  w);
        csv << label << ',' << irm_count << ',' << k << ',' << ns[i] << ',' << fmt(hota, 6) << ','
            << fmt(metric(r, "det_a"), 6) << ',' << fmt(metric(r, "ass_a"), 6) << ',' << fmt(idf1, 6) << ','
            << fmt(metric(r, "mota"), 6) << ',' << metric(r, "fp") << ',' << metric(r, "fn") << ','
            << metric(r, "idsw") << '\n';
        rows.push_back({{"checkpoint", label}, {"irm_count", irm_count}, {"n_max", k}, {"n", ns[i]},
                        {"hota", hota}, {"det_a", metric(r, "det_a")}, {"ass_a", metric(r, "ass_a")},
                        {"idf1", idf1}, {"mota", metric(r, "mota")}, {"fp", metric(r, "fp")},
                        {"fn", metric(r, "fn")}, {"idsw", metric(r, "idsw")}});
      }
    }
  }
  fs::create_directories(o.out);
  write_text(fs::path(o.out) / "sweep.csv", csv.str());
  write_text(fs::path(o.out) / "sweep.json", rows.dump(2) + "\n");
  write_text(fs::path(o.out) / "sweep_idf1.svg", svg_plot("IDF1 vs sampling interval", "IDF1", idf1_series));
  write_text(fs::path(o.out) / "sweep_hota.svg", svg_plot("HOTA vs sampling interval", "HOTA", hota_series));
  man.doc["checkpoints"] = checkpoints;
  man.doc["dataset"] = {{"path", o.mot.empty() ? o.data : o.mot}, {"fingerprint", hex(dataset_fingerprint(full))}};
  man.doc["n"] = ns;
  man.doc["rows"] = rows;
  return 0;
}

int run(const std::vector<std::string>& args);

int cmd_rerun(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Failure{HT_ERR_IO, "cannot open " + manifest_path};
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Failure{HT_ERR_VALIDATION, manifest_path + ": " + e.what()};
  }
  if (!doc.contains("argv") || !doc["argv"].is_array() || doc["argv"].empty()) {
    throw Failure{HT_ERR_VALIDATION, manifest_path + ": no recorded command line"};
  }
  std::vector<std::string> args = doc["argv"].get<std::vector<std::string>>();
  if (args.size() > 1 && args[1] == "rerun") throw Failure{HT_ERR_VALIDATION, "manifest records a rerun"};
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"histrack: multi-object tracking with historical queries"};
  app.require_subcommand(1);
  Options o;
  std::string manifest_path;

  auto* gen = app.add_subcommand("gen", "generate train/val synthetic datasets");
  gen->add_option("--config", o.config, "settings file (INI)");
  gen->add_option("--out", o.out, "output directory")->required();
  gen->add_option("--seed", o.seed, "data seed (overrides data.seed)");

  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--config", o.config, "settings file (INI)");
  train->add_option("--data", o.data, "training dataset archive")->required();
  train->add_option("--out", o.out, "output directory")->required();
  train->add_option("--seed", o.seed, "training seed (overrides train.seed)");
  train->add_option("--n-max", o.n_max, "historical queries per track");

  auto* track = app.add_subcommand("track", "track every video of a dataset");
  track->add_option("--config", o.config, "settings file; checked against the checkpoint");
  track->add_option("--checkpoint", o.checkpoints, "model checkpoint")->required()->expected(1);
  auto* data_opt = track->add_option("--data", o.data, "dataset archive");
  track->add_option("--mot", o.mot, "MOTChallenge sequence directory")->excludes(data_opt);
  track->add_option("--out", o.out, "output directory for track files")->required();
  track->add_option("--n", o.n, "sampling interval")->check(CLI::PositiveNumber);
  track->add_option("--n-max", o.n_max, "override historical queries per track");

  auto* eval = app.add_subcommand("eval", "score track files against ground truth");
  eval->add_option("--config", o.config, "settings file (INI)");
  auto* eval_data = eval->add_option("--data", o.data, "dataset archive");
  eval->add_option("--mot", o.mot, "MOTChallenge sequence directory")->excludes(eval_data);
  eval->add_option("--tracks", o.tracks, "directory of <video>.txt track files")->required();
  eval->add_option("--n", o.n, "sampling interval the tracks were produced at")->check(CLI::PositiveNumber);
  eval->add_option("--out", o.out, "output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "metrics against sampling interval");
  sweep->add_option("--config", o.config, "settings file; checked against each checkpoint");
  sweep->add_option("--checkpoint", o.checkpoints, "model checkpoint (repeatable)")->required();
  auto* sweep_data = sweep->add_option("--data", o.data, "dataset archive");
  sweep->add_option("--mot", o.mot, "MOTChallenge sequence directory")->excludes(sweep_data);
  sweep->add_option("--n", o.n_list, "comma separated sampling intervals, e.g. 1,2,3,6,10");
  sweep->add_option("--n-max", o.n_max_list, "comma separated historical query counts");
  sweep->add_option("--out", o.out, "output directory")->required();

  auto* rerun = app.add_subcommand("rerun", "repeat the command recorded in a manifest");
  rerun->add_option("manifest", manifest_path, "manifest JSON")->required();

  for (auto* sub : {train, track, eval, sweep}) sub->add_flag("--quiet", o.quiet, "less output");

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (rerun->parsed()) return cmd_rerun(manifest_path);
  if ((track->parsed() || eval->parsed() || sweep->parsed()) && o.data.empty() && o.mot.empty()) {
    throw Failure{HT_ERR_VALIDATION, "one of --data or --mot is required"};
  }
  CLI::App* sub = app.get_subcommands().front();
  Manifest man(sub->get_name(), args, o.out);
  int rc = 0;
  if (gen->parsed()) rc = cmd_gen(o, man);
  else if (train->parsed()) rc = cmd_train(o, man);
  else if (track->parsed()) rc = cmd_track(o, man);
  else if (eval->parsed()) rc = cmd_eval(o, man);
  else if (sweep->parsed()) rc = cmd_sweep(o, man);
  man.write();
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return run(args);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.status == HT_ERR_VALIDATION ? kExitValidation : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
