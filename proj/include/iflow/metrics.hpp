#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "iflow/core.hpp"

namespace iflow {

/// One MOT-Challenge row. Frames and box coordinates follow the file
/// convention (1-based). mask is optional and only used for mask overlap.
struct MotEntry {
  int frame = 0;
  int id = 0;
  double left = 0, top = 0, width = 0, height = 0;
  double conf = 1.0;
  std::shared_ptr<const PixelSet> mask;
};

using GtEntry = MotEntry;
using HypEntry = MotEntry;

enum class OverlapMode { Box, Mask };

double box_iou(const MotEntry& a, const MotEntry& b);

struct FrameMatch {
  int frame = 0;
  int gt_id = 0;
  int hyp_id = 0;
  double iou = 0;
};

struct SequenceMatch {
  std::vector<FrameMatch> matches;
  long fp = 0;
  long fn = 0;
  long id_switches = 0;
  int frames = 0;
};

/// Frame-by-frame CLEAR-MOT correspondence. A ground-truth object keeps its
/// previous hypothesis whenever that pair is still above the threshold; the
/// rest are matched by maximum total IoU among pairs with IoU >= threshold.
/// An id switch is a ground-truth object matched to a hypothesis other than
/// the one it was last matched to.
SequenceMatch match_sequence(std::span<const GtEntry> gt, std::span<const HypEntry> hyp,
                             double iou_threshold = 0.5, OverlapMode overlap = OverlapMode::Box);

struct TrajectoryStats {
  int mostly_tracked = 0;
  int partially_tracked = 0;
  int mostly_lost = 0;
  int fragmentations = 0;
};

/// Coverage classes (>= 80% tracked, <= 20% tracked, otherwise partial) and
/// fragmentations, i.e. matched-to-unmatched transitions over the frames
/// where each ground-truth trajectory is present.
TrajectoryStats trajectory_stats(std::span<const GtEntry> gt, std::span<const FrameMatch> matches);

struct ClearMotReport {
  double mota = 0, motp = 0, motal = 0;  // percent
  double recall = 0, precision = 0;      // percent
  double far = 0;                        // false positives per frame
  int gt = 0, mt = 0, pt = 0, ml = 0;    // trajectory counts
  long tp = 0, fp = 0, fn = 0, id_switches = 0, fragmentations = 0;
  int frames = 0;
  double fps = 0;
};

/// CLEAR-MOT report. Throws EmptyGroundTruth when gt has no rows.
ClearMotReport evaluate(std::span<const GtEntry> gt, std::span<const HypEntry> hyp,
                        double iou_threshold = 0.5, double fps = 30.0,
                        OverlapMode overlap = OverlapMode::Box);

/// Header and value line, columns: Rcll Prcn FAR GT MT PT ML FP FN IDs FM MOTA MOTP MOTAL.
std::string format_report(const ClearMotReport& report);

/// Flat `key: value` lines, one metric per line.
std::string format_report_kv(const ClearMotReport& report);

}  // namespace iflow
