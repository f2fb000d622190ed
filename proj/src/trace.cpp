#include "arousal/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace arousal {

std::vector<double> normalize_minmax(std::span<const double> raw) {
  if (raw.empty()) throw DataError("normalize_minmax: empty sequence");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out(raw.size(), 0.5);
  if (range > 0.0)
    std::transform(raw.begin(), raw.end(), out.begin(), [&](double v) { return (v - min) / range; });
  return out;
}

std::vector<double> resample_zoh(std::span<const AnnotationSample> samples, Index n_frames, double fps) {
  if (samples.empty()) throw DataError("resample_zoh: no annotation samples");
  if (n_frames < 1) throw DataError("resample_zoh: n_frames must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(n_frames));
  std::size_t j = 0;
  for (Index k = 0; k < n_frames; ++k) {
    const double t = static_cast<double>(k) / fps;
    while (j + 1 < samples.size() && samples[j + 1].time_s <= t) ++j;
    out[static_cast<std::size_t>(k)] = samples[j].value;
  }
  return out;
}

std::vector<double> downsample_to_rate(std::span<const double> per_frame, double fps, double rate) {
  std::vector<double> out;
  for (Index k = 0;; ++k) {
    const auto frame = static_cast<std::size_t>(std::ceil(static_cast<double>(k) * fps / rate - 1e-9));
    if (frame >= per_frame.size()) break;
    out.push_back(per_frame[frame]);
  }
  return out;
}

double dtw_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("dtw_distance: empty sequence");
  const std::size_t m = b.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Two rows of the cumulative cost table, each padded with an infinite column 0.
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cur[0] = inf;
    for (std::size_t j = 0; j < m; ++j) {
      const double best = std::min({prev[j + 1], cur[j], prev[j]});
      cur[j + 1] = std::abs(a[i] - b[j]) + best;
    }
    std::swap(prev, cur);
    prev[0] = inf;
  }
  return prev[m];
}

std::vector<double> median_trace(std::span<const std::vector<double>> traces) {
  if (traces.empty()) throw DataError("median_trace: no traces");
  std::size_t len = traces.front().size();
  for (const auto& t : traces) len = std::min(len, t.size());
  std::vector<double> out(len), column(traces.size());
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t s = 0; s < traces.size(); ++s) column[s] = traces[s][k];
    std::sort(column.begin(), column.end());
    const std::size_t n = column.size();
    out[k] = n % 2 == 1 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }
  return out;
}

double trace_mean(std::span<const double> values) {
  if (values.empty()) throw DataError("trace_mean: empty trace");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

ArousalTrace make_arousal_trace(const RawSession& session) {
  std::vector<double> raw(session.raw_trace.size());
  std::transform(session.raw_trace.begin(), session.raw_trace.end(), raw.begin(),
                 [](const AnnotationSample& s) { return s.value; });
  const auto norm = normalize_minmax(raw);
  std::vector<AnnotationSample> normalized(session.raw_trace);
  for (std::size_t k = 0; k < norm.size(); ++k) normalized[k].value = norm[k];
  return {session.id, resample_zoh(normalized, session.frames.size(), session.fps)};
}

std::vector<OutlierVerdict> filter_outliers(std::span<const ArousalTrace> traces, double threshold, double fps,
                                            double annotation_rate) {
  if (traces.empty()) return {};
  if (!(threshold > 0.0)) throw DataError("filter_outliers: threshold must be positive");
  std::vector<std::vector<double>> coarse;
  coarse.reserve(traces.size());
  for (const auto& t : traces) coarse.push_back(downsample_to_rate(t.values, fps, annotation_rate));
  const auto median = median_trace(coarse);
  std::vector<OutlierVerdict> out;
  out.reserve(traces.size());
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const double d = dtw_distance(coarse[k], median);
    out.push_back({traces[k].session_id, d, d <= threshold});
  }
  return out;
}

}  // namespace arousal
