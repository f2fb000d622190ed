#pragma once

#include "arousal/audio.hpp"
#include "arousal/common.hpp"
#include "arousal/ingest.hpp"
#include "arousal/trace.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace arousal {

/// A cleaned session ready for windowing: shared pixel and audio storage plus
/// its per-frame arousal trace.
struct PreparedSession {
  std::string id;
  std::shared_ptr<const FrameTrack> frames;
  std::shared_ptr<const AudioClip> audio;
  double fps = 30.0;
  ArousalTrace trace;
  double mean_arousal = 0.5;
};

PreparedSession prepare_session(RawSession session);

struct FrameSpan {
  Index start = 0;
  Index length = 0;
};

struct Segment {
  std::string session_id;
  FrameSpan span;
  std::shared_ptr<const FrameTrack> frames;
  Vector mfcc;
  double mean_arousal = 0.0;
  /// Mean of the whole session trace (the class-splitting point).
  double session_mean = 0.0;

  /// Frame stack scaled to [0, 1], one frame per row.
  template <typename Scalar = double>
  MatrixX<Scalar> frame_stack() const {
    return frames->pixels().middleRows(span.start, span.length).template cast<Scalar>() / Scalar(255);
  }
};

struct LabeledExample {
  const Segment* segment = nullptr;
  int label = 0;
};

/// Indices into the segment list the pair was built from.
struct PreferencePair {
  std::size_t first = 0;
  std::size_t second = 0;
  int label = 0;
};

/// round(window_s * fps) with halves rounded up.
Index window_frames(double window_s, double fps);

/// Non-overlapping windows [0, n), [n, 2n), ...; a trailing partial window is
/// dropped. Returns an empty list when the session is shorter than one window.
std::vector<Segment> segment_session(const PreparedSession& session, double window_s, const MfccConfig& mfcc = {});

/// Label 1 when mean > mu + epsilon, 0 when mean < mu - epsilon; segments
/// inside the band (ties included) are omitted.
std::vector<LabeledExample> label_segments(std::span<const Segment> segments, double epsilon);

/// Every within-session pair whose means differ by more than delta, emitted
/// in both orders; label 1 means `first` has the higher mean.
std::vector<PreferencePair> make_pairs(std::span<const Segment> segments, double delta);

}  // namespace arousal
