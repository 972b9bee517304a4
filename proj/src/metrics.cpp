#include "iflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "iflow/association.hpp"

namespace iflow {

double box_iou(const MotEntry& a, const MotEntry& b) {
  const double iw = std::min(a.left + a.width, b.left + b.width) - std::max(a.left, b.left);
  const double ih = std::min(a.top + a.height, b.top + b.height) - std::max(a.top, b.top);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.width * a.height + b.width * b.height - inter);
}

namespace {

double mask_iou(const MotEntry& a, const MotEntry& b) {
  if (!a.mask || !b.mask) throw InvalidArgument("mask overlap requested for a row without mask");
  const double inter = double(intersection_count(*a.mask, *b.mask));
  const double uni = double(a.mask->size() + b.mask->size()) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::map<int, std::vector<const MotEntry*>> by_frame(std::span<const MotEntry> rows) {
  std::map<int, std::vector<const MotEntry*>> frames;
  for (const auto& r : rows) frames[r.frame].push_back(&r);
  return frames;
}

}  // namespace

SequenceMatch match_sequence(std::span<const GtEntry> gt, std::span<const HypEntry> hyp,
                             double iou_threshold, OverlapMode overlap) {
  if (!(iou_threshold > 0 && iou_threshold <= 1))
    throw InvalidArgument("iou threshold must lie in (0, 1]");
  const auto iou = [overlap](const MotEntry& a, const MotEntry& b) {
    return overlap == OverlapMode::Box ? box_iou(a, b) : mask_iou(a, b);
  };

  SequenceMatch result;
  const auto gt_frames = by_frame(gt);
  const auto hyp_frames = by_frame(hyp);
  std::set<int> frames;
  for (const auto& [f, _] : gt_frames) frames.insert(f);
  for (const auto& [f, _] : hyp_frames) frames.insert(f);
  if (!frames.empty()) result.frames = *frames.rbegin() - *frames.begin() + 1;

  const std::vector<const MotEntry*> none;
  std::map<int, int> last_match;  // gt id -> hyp id

  for (int f : frames) {
    const auto git = gt_frames.find(f);
    const auto hit = hyp_frames.find(f);
    const auto& gts = git == gt_frames.end() ? none : git->second;
    const auto& hyps = hit == hyp_frames.end() ? none : hit->second;
    std::vector<bool> gt_done(gts.size(), false), hyp_done(hyps.size(), false);

    // Keep last frame's correspondences that are still valid.
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const auto prev = last_match.find(gts[g]->id);
      if (prev == last_match.end()) continue;
      for (std::size_t h = 0; h < hyps.size(); ++h) {
        if (hyp_done[h] || hyps[h]->id != prev->second) continue;
        const double v = iou(*gts[g], *hyps[h]);
        if (v >= iou_threshold) {
          gt_done[g] = hyp_done[h] = true;
          result.matches.push_back({f, gts[g]->id, hyps[h]->id, v});
        }
        break;
      }
    }

    std::vector<int> free_g, free_h;
    for (std::size_t g = 0; g < gts.size(); ++g)
      if (!gt_done[g]) free_g.push_back(int(g));
    for (std::size_t h = 0; h < hyps.size(); ++h)
      if (!hyp_done[h]) free_h.push_back(int(h));

    ScoreMatrix<double> score = ScoreMatrix<double>::Zero(Eigen::Index(free_g.size()),
                                                          Eigen::Index(free_h.size()));
    for (std::size_t a = 0; a < free_g.size(); ++a)
      for (std::size_t b = 0; b < free_h.size(); ++b) {
        const double v = iou(*gts[free_g[a]], *hyps[free_h[b]]);
        if (v >= iou_threshold) score(Eigen::Index(a), Eigen::Index(b)) = v;
      }
    for (const auto& [a, b] : max_score_matching(score).pairs) {
      const MotEntry& g = *gts[free_g[a]];
      const MotEntry& h = *hyps[free_h[b]];
      gt_done[free_g[a]] = hyp_done[free_h[b]] = true;
      const auto prev = last_match.find(g.id);
      if (prev != last_match.end() && prev->second != h.id) ++result.id_switches;
      last_match[g.id] = h.id;
      result.matches.push_back({f, g.id, h.id, score(a, b)});
    }

    result.fn += long(std::count(gt_done.begin(), gt_done.end(), false));
    result.fp += long(std::count(hyp_done.begin(), hyp_done.end(), false));
  }
  return result;
}

TrajectoryStats trajectory_stats(std::span<const GtEntry> gt, std::span<const FrameMatch> matches) {
  std::map<int, std::set<int>> present, tracked;
  for (const auto& g : gt) present[g.id].insert(g.frame);
  for (const auto& m : matches) tracked[m.gt_id].insert(m.frame);

  TrajectoryStats stats;
  for (const auto& [id, frames] : present) {
    const auto& hit = tracked[id];
    std::size_t matched = 0;
    bool was_tracked = false;
    for (int f : frames) {
      const bool now = hit.count(f) > 0;
      if (was_tracked && !now) ++stats.fragmentations;
      matched += now;
      was_tracked = now;
    }
    const double ratio = double(matched) / double(frames.size());
    if (ratio >= 0.8)
      ++stats.mostly_tracked;
    else if (ratio <= 0.2)
      ++stats.mostly_lost;
    else
      ++stats.partially_tracked;
  }
  return stats;
}

ClearMotReport evaluate(std::span<const GtEntry> gt, std::span<const HypEntry> hyp,
                        double iou_threshold, double fps, OverlapMode overlap) {
  if (gt.empty()) throw EmptyGroundTruth("ground truth contains no rows");
  const SequenceMatch seq = match_sequence(gt, hyp, iou_threshold, overlap);
  const TrajectoryStats traj = trajectory_stats(gt, seq.matches);

  ClearMotReport r;
  r.tp = long(seq.matches.size());
  r.fp = seq.fp;
  r.fn = seq.fn;
  r.id_switches = seq.id_switches;
  r.fragmentations = traj.fragmentations;
  r.mt = traj.mostly_tracked;
  r.pt = traj.partially_tracked;
  r.ml = traj.mostly_lost;
  r.gt = r.mt + r.pt + r.ml;
  r.frames = seq.frames;
  r.fps = fps;

  const double total = double(gt.size());
  r.mota = 100.0 * (1.0 - double(r.fn + r.fp + r.id_switches) / total);
  r.motal = 100.0 * (1.0 - (double(r.fn + r.fp) + std::log10(double(r.id_switches) + 1.0)) / total);
  double iou_sum = 0;
  for (const auto& m : seq.matches) iou_sum += m.iou;
  r.motp = r.tp > 0 ? 100.0 * iou_sum / double(r.tp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? 100.0 * double(r.tp) / double(r.tp + r.fn) : 0.0;
  r.precision = r.tp + r.fp > 0 ? 100.0 * double(r.tp) / double(r.tp + r.fp) : 0.0;
  r.far = r.frames > 0 ? double(r.fp) / double(r.frames) : 0.0;
  return r;
}

std::string format_report(const ClearMotReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%6s %6s %6s %5s %5s %5s %5s %7s %7s %6s %6s %6s %6s %6s\n"
                "%6.1f %6.1f %6.2f %5d %5d %5d %5d %7ld %7ld %6ld %6ld %6.1f %6.1f %6.1f\n",
                "Rcll", "Prcn", "FAR", "GT", "MT", "PT", "ML", "FP", "FN", "IDs", "FM", "MOTA",
                "MOTP", "MOTAL", r.recall, r.precision, r.far, r.gt, r.mt, r.pt, r.ml, r.fp, r.fn,
                r.id_switches, r.fragmentations, r.mota, r.motp, r.motal);
  return buf;
}

std::string format_report_kv(const ClearMotReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "Rcll: %.4f\nPrcn: %.4f\nFAR: %.4f\nGT: %d\nMT: %d\nPT: %d\nML: %d\n"
                "TP: %ld\nFP: %ld\nFN: %ld\nIDs: %ld\nFM: %ld\nMOTA: %.4f\nMOTP: %.4f\n"
                "MOTAL: %.4f\nframes: %d\nfps: %.4f\n",
                r.recall, r.precision, r.far, r.gt, r.mt, r.pt, r.ml, r.tp, r.fp, r.fn,
                r.id_switches, r.fragmentations, r.mota, r.motp, r.motal, r.frames, r.fps);
  return buf;
}

}  // namespace iflow
