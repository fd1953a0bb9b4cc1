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

#include "histrack/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "histrack/assignment.hpp"
#include "histrack/model.hpp"
#include "histrack/rng.hpp"

namespace histrack {

namespace {

using ad::Var;

Mat box_rows(const FrameAnnotations& gt, const std::vector<int>& entries) {
  Mat m(static_cast<Eigen::Index>(entries.size()), 4);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& b = gt.entries[static_cast<std::size_t>(entries[i])].box;
    m.row(static_cast<Eigen::Index>(i)) << b.cx, b.cy, b.w, b.h;
  }
  return m;
}

struct AdamW {
  std::map<std::string, Mat> m, v;
  int t = 0;

  void step(ad::ParamStore& params, const std::map<std::string, Mat>& grads, double lr, double wd) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (const auto& [name, g] : grads) {
      Mat& p = params.mutable_at(name);
      Mat& mm = m.try_emplace(name, Mat::Zero(g.rows(), g.cols())).first->second;
      Mat& vi = v.try_emplace(name, Mat::Zero(g.rows(), g.cols())).first->second;
      mm = b1 * mm + (1 - b1) * g;
      vi = b2 * vi + (1 - b2) * g.cwiseProduct(g);
      p *= 1.0 - lr * wd;
      p.array() -= lr * (mm.array() / c1) / ((vi.array() / c2).sqrt() + eps);
    }
  }
};

}  // namespace

Var proposal_loss(const Config& c, Var objectness, Var token_boxes, const FrameAnnotations& gt) {
  ad::Tape& tape = *objectness.tape;
  const int n = static_cast<int>(objectness.rows());
  const int gw = c.token_grid_w();
  const int gh = c.token_grid_h();
  std::vector<int> label(static_cast<std::size_t>(n), 0);
  std::vector<int> pos_tokens, pos_entries;
  for (std::size_t i = 0; i < gt.entries.size(); ++i) {
    const auto& e = gt.entries[i];
    if (!e.visible) continue;
    const int gx = std::clamp(static_cast<int>(std::floor(e.box.cx * gw)), 0, gw - 1);
    const int gy = std::clamp(static_cast<int>(std::floor(e.box.cy * gh)), 0, gh - 1);
    const int token = gy * gw + gx;
    if (label[static_cast<std::size_t>(token)] != 0) continue;
    label[static_cast<std::size_t>(token)] = 1;
    pos_tokens.push_back(token);
    pos_entries.push_back(static_cast<int>(i));
  }
  // Two-way log-softmax over (0, logit) gives log(1 - p) and log p stably.
  Var two = ad::log_softmax_rows(ad::concat_cols({tape.constant(Mat::Zero(n, 1)), objectness}));
  std::vector<std::pair<int, int>> picks;
  for (int r = 0; r < n; ++r) picks.emplace_back(r, label[static_cast<std::size_t>(r)]);
  Var loss = ad::scale(ad::sum(ad::pick_elements(two, picks)), -1.0 / n);
  if (!pos_tokens.empty()) {
    const double inv = 1.0 / static_cast<double>(pos_tokens.size());
    Var boxes = ad::gather_rows(token_boxes, pos_tokens);
    const Mat targets = box_rows(gt, pos_entries);
    Var l1 = ad::sum(ad::abs(ad::sub(boxes, tape.constant(targets))));
    Var giou = ad::sum(giou_loss_rows(boxes, targets));
    loss = ad::add(loss, ad::scale(ad::add(ad::scale(l1, c.lambda_l1), ad::scale(giou, c.lambda_giou)), inv));
  }
  return ad::scale(loss, c.proposal_weight);
}

ClipResult clip_objective(ad::Binder& p, const Config& c, const std::vector<const Image*>& frames,
                          const std::vector<FrameAnnotations>& annotations, std::vector<ClipTrack> tracks) {
  if (frames.empty() || frames.size() != annotations.size())
    throw std::invalid_argument("clip_objective: need one annotation per frame and at least one frame");
  ad::Tape& tape = p.tape();
  const MatchWeights weights{c.lambda_cls, c.lambda_l1, c.lambda_giou};
  std::vector<std::vector<FrameLayerTerms>> terms;
  Var proposal = tape.constant(Mat::Zero(1, 1));
  ClipResult result;

  for (std::size_t t = 0; t < frames.size(); ++t) {
    FrameAnnotations gt;
    gt.frame_index = annotations[t].frame_index;
    for (const auto& e : annotations[t].entries) {
      if (e.visible) gt.entries.push_back(e);
    }
    const FrameFeatures f = encode_frame(p, c, *frames[t]);
    proposal = ad::add(proposal, proposal_loss(c, f.objectness, f.token_boxes, gt));

    std::vector<Var> content_parts, anchor_parts;
    std::vector<int> groups, latest_rows, track_ids;
    std::vector<HistoricalRows> historical;
    int row = 0;
    for (std::size_t k = 0; k < tracks.size(); ++k) {
      const auto& tr = tracks[k];
      HistoricalRows h;
      h.track_index = static_cast<int>(k);
      for (std::size_t slot = 0; slot < tr.bank.size(); ++slot) {
        content_parts.push_back(tr.bank[slot]);
        anchor_parts.push_back(tr.anchor);
        groups.push_back(tr.track_id);
        (slot == 0 ? latest_rows : h.rows).push_back(row++);
      }
      historical.push_back(std::move(h));
      track_ids.push_back(tr.track_id);
      result.max_bank = std::max(result.max_bank, static_cast<int>(tr.bank.size()));
    }
    const int n_tracking = row;
    content_parts.push_back(f.proposal_content);
    anchor_parts.push_back(f.proposal_anchors);
    for (int j = 0; j < c.n_det; ++j) groups.push_back(detection_group(j));
    const int n_rows = n_tracking + c.n_det;

    const auto layers = forward_frame(p, c, ad::concat_rows(content_parts), ad::concat_rows(anchor_parts), groups,
                                      n_tracking, f);
    std::vector<int> bip_rows = latest_rows;
    for (int r = n_tracking; r < n_rows; ++r) bip_rows.push_back(r);

    std::vector<FrameLayerTerms> frame_terms;
    Assignment final_pi;
    for (const auto& layer : layers) {
      std::vector<Prediction> det_preds;
      for (int r = n_tracking; r < n_rows; ++r) det_preds.push_back(layer.prediction(r));
      Assignment pi = build_matching(track_ids, det_preds, gt, weights);
      FrameLayerTerms ft;
      ft.bip = bipartite_loss(ad::gather_rows(layer.log_probs, bip_rows), ad::gather_rows(layer.boxes, bip_rows), gt,
                              pi, c);
      ft.toc = toc_loss(layer.log_probs, layer.boxes, historical, gt, pi, c);
      frame_terms.push_back(ft);
      final_pi = std::move(pi);
    }
    terms.push_back(std::move(frame_terms));

    // Lifecycle driven by ground-truth identity.
    const LayerOutput& last = layers.back();
    std::vector<ClipTrack> next;
    for (std::size_t k = 0; k < tracks.size(); ++k) {
      ClipTrack tr = std::move(tracks[k]);
      if (gt.find(tr.track_id) != nullptr) {
        const int r = latest_rows[k];
        tr.bank.insert(tr.bank.begin(), ad::slice_rows(last.content, r, 1));
        tr.bank_frames.insert(tr.bank_frames.begin(), static_cast<int>(t));
        if (static_cast<int>(tr.bank.size()) > c.n_max) {
          tr.bank.resize(static_cast<std::size_t>(c.n_max));
          tr.bank_frames.resize(static_cast<std::size_t>(c.n_max));
        }
        tr.anchor = ad::slice_rows(last.boxes, r, 1);
        tr.lost_age = 0;
      } else if (++tr.lost_age > c.n_keep) {
        continue;
      }
      next.push_back(std::move(tr));
    }
    for (const auto& [pred, g] : final_pi.pairs) {
      if (pred < static_cast<int>(tracks.size())) continue;
      const int r = n_tracking + pred - static_cast<int>(tracks.size());
      const auto& e = gt.entries[static_cast<std::size_t>(g)];
      ClipTrack born;
      born.track_id = e.track_id;
      born.class_id = e.class_id;
      born.bank.push_back(ad::slice_rows(last.content, r, 1));
      born.bank_frames.push_back(static_cast<int>(t));
      born.anchor = ad::slice_rows(last.boxes, r, 1);
      next.push_back(std::move(born));
    }
    tracks = std::move(next);
  }

  result.tracking_loss = clip_loss(terms, c);
  result.breakdown = summarize(terms, c);
  result.terms = std::move(terms);
  result.proposal = proposal.scalar();
  result.loss = ad::add(result.tracking_loss, proposal);
  return result;
}

TrainResult train(const Config& config, const Dataset& data, const TrainOptions& options) {
  config.validate();
  std::vector<int> usable;
  for (std::size_t i = 0; i < data.videos.size(); ++i) {
    if (data.videos[i].length() > 0) usable.push_back(static_cast<int>(i));
  }
  if (usable.empty()) throw ValidationError("train: dataset has no frames");

  TrainResult result;
  result.params = init_params(config, config.seed);
  Rng rng(Rng::split(config.seed, 0x7261696eULL));
  AdamW opt;
  const int batches_per_epoch = (static_cast<int>(usable.size()) + config.batch_clips - 1) / config.batch_clips;
  const int total_steps = batches_per_epoch * config.epochs;
  const int decay_from = total_steps - total_steps / 4;
  int step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<int> order = usable;
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    }
    for (int b = 0; b < batches_per_epoch; ++b) {
      const int first = b * config.batch_clips;
      const int last = std::min(static_cast<int>(order.size()), first + config.batch_clips);
      std::map<std::string, Mat> grads;
      TrainProgress prog;
      for (int i = first; i < last; ++i) {
        const VideoItem& video = data.videos[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        const int len = video.length();
        const int span = config.clip_length - 1;
        int stride = rng.uniform_int(1, config.max_clip_stride);
        if (span > 0) stride = std::max(1, std::min(stride, (len - 1) / span));
        const int frames_used = span > 0 ? std::min(config.clip_length, (len - 1) / stride + 1) : 1;
        const int start = rng.uniform_int(0, len - 1 - (frames_used - 1) * stride);
        std::vector<const Image*> frames;
        std::vector<FrameAnnotations> ann;
        for (int k = 0; k < frames_used; ++k) {
          frames.push_back(&video.frames[static_cast<std::size_t>(start + k * stride)]);
          ann.push_back(video.annotations[static_cast<std::size_t>(start + k * stride)]);
        }

        ad::Tape tape;
        ad::Binder binder(tape, result.params, true);
        const ClipResult clip = clip_objective(binder, config, frames, ann);
        tape.backward(clip.loss);
        for (auto& [name, g] : binder.gradients()) {
          auto it = grads.find(name);
          if (it == grads.end()) grads.emplace(name, g);
          else it->second += g;
        }
        prog.loss += clip.loss.scalar();
        prog.proposal += clip.proposal;
        prog.breakdown.bip_class += clip.breakdown.bip_class;
        prog.breakdown.bip_l1 += clip.breakdown.bip_l1;
        prog.breakdown.bip_giou += clip.breakdown.bip_giou;
        prog.breakdown.toc += clip.breakdown.toc;
        prog.breakdown.total += clip.breakdown.total;
        prog.breakdown.n_his += clip.breakdown.n_his;
      }
      const double n = last - first;
      double sq = 0;
      for (auto& [name, g] : grads) {
        g /= n;
        sq += g.squaredNorm();
      }
      const double norm = std::sqrt(sq);
      if (config.grad_clip > 0 && norm > config.grad_clip) {
        for (auto& [name, g] : grads) g *= config.grad_clip / norm;
      }
      const double lr = step >= decay_from ? config.learning_rate * 0.1 : config.learning_rate;
      opt.step(result.params, grads, lr, config.weight_decay);

      prog.step = ++step;
      prog.total_steps = total_steps;
      prog.epoch = epoch;
      prog.learning_rate = lr;
      prog.loss /= n;
      prog.proposal /= n;
      prog.breakdown.bip_class /= n;
      prog.breakdown.bip_l1 /= n;
      prog.breakdown.bip_giou /= n;
      prog.breakdown.toc /= n;
      prog.breakdown.total /= n;
      result.curve.push_back(prog);
      if (options.on_step) options.on_step(prog);
    }
  }
  return result;
}

}  // namespace histrack
