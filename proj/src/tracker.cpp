#include "iflow/tracker.hpp"

#include <string>

#include "iflow/association.hpp"
#include "iflow/flowops.hpp"

namespace iflow {

namespace {

std::vector<InstanceMask> large_enough(std::span<const InstanceMask> detections,
                                       const TrackerConfig& config) {
  std::vector<InstanceMask> kept;
  for (const auto& d : detections)
    if (d.area() >= std::size_t(config.min_mask_area)) kept.push_back(d);
  return kept;
}

PredictedMask predict_track(const Track& track, const FrameInput& input,
                            const TrackerConfig& config) {
  PredictedMask pred;
  if (config.zero_flow) {
    pred = identity_predict(track.mask, config.closing_radius);
  } else {
    try {
      pred = dense_predict(track.mask, *input.flow, config.closing_radius);
    } catch (const NoSamples&) {
      pred = identity_predict(track.mask, config.closing_radius);
    }
  }
  pred.source_track = track.id;
  pred.frame = input.frame;
  return pred;
}

}  // namespace

TrackerState init(std::span<const InstanceMask> first_detections, const TrackerConfig& config,
                  int frame) {
  config.validate();
  TrackerState state;
  state.config = config;
  state.frame = frame;
  for (const auto& det : large_enough(first_detections, config)) {
    state.tracks.push_back({state.next_id++, det.pixels(), 0, frame, frame});
  }
  return state;
}

FrameOutput initial_output(const TrackerState& state) {
  FrameOutput out;
  out.frame = state.frame;
  for (const Track& t : state.tracks) {
    out.records.push_back({t.id, t.mask, t.missed > 0});
    out.events.push_back({TrackEventKind::Born, t.id, state.frame});
  }
  return out;
}

FrameOutput step(TrackerState& state, const FrameInput& input) {
  if (input.frame != state.frame + 1) {
    throw FrameOrderViolation("expected frame " + std::to_string(state.frame + 1) + ", got " +
                              std::to_string(input.frame));
  }
  const TrackerConfig& config = state.config;
  if (!config.zero_flow && !input.flow && !state.tracks.empty())
    throw InvalidArgument("flow field required unless zero_flow is set");

  const std::vector<InstanceMask> detections = large_enough(input.detections, config);

  std::vector<PredictedMask> predictions;
  predictions.reserve(state.tracks.size());
  for (const Track& track : state.tracks) predictions.push_back(predict_track(track, input, config));

  const Matching matching = solve_assignment(affinity(predictions, detections));

  FrameOutput out;
  out.frame = input.frame;
  std::vector<Track> alive;

  std::size_t next_pair = 0;
  for (std::size_t k = 0; k < state.tracks.size(); ++k) {
    Track track = std::move(state.tracks[k]);
    const bool matched =
        next_pair < matching.pairs.size() && matching.pairs[next_pair].first == int(k);
    if (matched) {
      track.mask = detections[matching.pairs[next_pair].second].pixels();
      track.missed = 0;
      track.last_matched = input.frame;
      ++next_pair;
      out.records.push_back({track.id, track.mask, false});
      alive.push_back(std::move(track));
      continue;
    }
    ++track.missed;
    PixelSet& predicted = predictions[k].pixels;
    if (track.missed > config.md || predicted.empty()) {
      out.events.push_back({TrackEventKind::Died, track.id, input.frame});
      continue;
    }
    track.mask = std::move(predicted);
    if (config.emit_coasted) out.records.push_back({track.id, track.mask, true});
    alive.push_back(std::move(track));
  }

  for (int col : matching.unmatched_cols) {
    Track track{state.next_id++, detections[col].pixels(), 0, input.frame, input.frame};
    out.records.push_back({track.id, track.mask, false});
    out.events.push_back({TrackEventKind::Born, track.id, input.frame});
    alive.push_back(std::move(track));
  }

  state.tracks = std::move(alive);
  state.frame = input.frame;
  return out;
}

std::vector<FrameOutput> run(std::span<const InstanceMask> first_detections,
                             std::span<const FrameInput> sequence, const TrackerConfig& config,
                             int first_frame) {
  TrackerState state = init(first_detections, config, first_frame);
  std::vector<FrameOutput> outputs;
  outputs.push_back(initial_output(state));
  for (const FrameInput& input : sequence) outputs.push_back(step(state, input));
  return outputs;
}

}  // namespace iflow
