#pragma once

#include "arousal/common.hpp"
#include "arousal/ingest.hpp"

#include <span>
#include <string>
#include <vector>

namespace arousal {

/// Per-frame arousal in [0, 1] at the session's video rate.
struct ArousalTrace {
  std::string session_id;
  std::vector<double> values;
};

/// Maps values to [0, 1] with (v - min) / (max - min). A constant input maps
/// to all 0.5.
std::vector<double> normalize_minmax(std::span<const double> raw);

/// Zero-order hold: frame k (time k / fps) takes the latest sample with
/// time <= k / fps; frames before the first sample take the first value.
std::vector<double> resample_zoh(std::span<const AnnotationSample> samples, Index n_frames, double fps);

/// Inverse of `resample_zoh` for samples on a regular grid starting at t = 0:
/// picks the first frame at or after each k / rate.
std::vector<double> downsample_to_rate(std::span<const double> per_frame, double fps, double rate);

/// Classic DTW with cost |a_i - b_j|, symmetric steps and no window.
double dtw_distance(std::span<const double> a, std::span<const double> b);

/// Pointwise median over the common prefix of all traces.
std::vector<double> median_trace(std::span<const std::vector<double>> traces);

double trace_mean(std::span<const double> values);

/// Normalizes a raw session's annotations and holds them onto its frames.
ArousalTrace make_arousal_trace(const RawSession& session);

struct OutlierVerdict {
  std::string session_id;
  double distance = 0.0;
  bool retained = true;
};

/// DTW distance of every trace to the median trace; a trace is retained when
/// its distance is <= threshold. Traces are compared at `annotation_rate`.
std::vector<OutlierVerdict> filter_outliers(std::span<const ArousalTrace> traces, double threshold, double fps = 30.0,
                                            double annotation_rate = 4.0);

}  // namespace arousal
