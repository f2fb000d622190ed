#include "arousal/windows.hpp"

#include <cmath>

namespace arousal {

PreparedSession prepare_session(RawSession session) {
  session.validate();
  PreparedSession out;
  out.id = session.id;
  out.fps = session.fps;
  out.trace = make_arousal_trace(session);
  out.mean_arousal = trace_mean(out.trace.values);
  out.frames = std::make_shared<const FrameTrack>(std::move(session.frames));
  out.audio = std::make_shared<const AudioClip>(std::move(session.audio));
  return out;
}

Index window_frames(double window_s, double fps) { return static_cast<Index>(std::floor(window_s * fps + 0.5)); }

std::vector<Segment> segment_session(const PreparedSession& session, double window_s, const MfccConfig& mfcc) {
  if (!(window_s > 0.0)) throw DataError("segment_session: window must be positive");
  const Index n = window_frames(window_s, session.fps);
  const Index total = session.frames->size();
  if (n < 1 || n > total) return {};

  const AudioClip& audio = *session.audio;
  const Index need = mfcc_required_samples(window_s, audio.sample_rate, mfcc);
  std::vector<double> scratch(static_cast<std::size_t>(need));

  std::vector<Segment> out;
  out.reserve(static_cast<std::size_t>(total / n));
  for (Index start = 0; start + n <= total; start += n) {
    Segment seg;
    seg.session_id = session.id;
    seg.span = {start, n};
    seg.frames = session.frames;
    double sum = 0.0;
    for (Index k = start; k < start + n; ++k) sum += session.trace.values[static_cast<std::size_t>(k)];
    seg.mean_arousal = sum / static_cast<double>(n);
    seg.session_mean = session.mean_arousal;

    // Audio may end up to one video frame early; zero-pad that tail.
    const auto first = static_cast<std::size_t>(std::floor(static_cast<double>(start) / session.fps * audio.sample_rate));
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (std::size_t i = 0; i < scratch.size() && first + i < audio.samples.size(); ++i)
      scratch[i] = audio.samples[first + i];
    seg.mfcc = flatten(mfcc_block(scratch, audio.sample_rate, window_s, mfcc));
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<LabeledExample> label_segments(std::span<const Segment> segments, double epsilon) {
  if (epsilon < 0.0) throw DataError("label_segments: epsilon must be >= 0");
  std::vector<LabeledExample> out;
  for (const auto& seg : segments) {
    if (seg.mean_arousal > seg.session_mean + epsilon)
      out.push_back({&seg, 1});
    else if (seg.mean_arousal < seg.session_mean - epsilon)
      out.push_back({&seg, 0});
  }
  return out;
}

std::vector<PreferencePair> make_pairs(std::span<const Segment> segments, double delta) {
  if (delta < 0.0) throw DataError("make_pairs: delta must be >= 0");
  std::vector<PreferencePair> out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) {
      if (segments[i].session_id != segments[j].session_id) continue;
      const double diff = segments[i].mean_arousal - segments[j].mean_arousal;
      if (std::abs(diff) <= delta) continue;
      const int label = diff > 0.0 ? 1 : 0;
      out.push_back({i, j, label});
      out.push_back({j, i, 1 - label});
    }
  }
  return out;
}

}  // namespace arousal
