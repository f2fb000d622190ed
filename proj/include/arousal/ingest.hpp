#pragma once

#include "arousal/common.hpp"
#include "arousal/image.hpp"
#include "arousal/wav.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace arousal {

struct Resolution {
  Index height = 72;
  Index width = 96;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Grayscale frames stored one per row (row k = frame k, pixels row-major).
class FrameTrack {
 public:
  using Storage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using FrameMap = Eigen::Map<const GrayImage>;

  FrameTrack() = default;
  FrameTrack(Index count, Resolution res) : res_(res), pixels_(count, res.height * res.width) {}

  Index size() const { return pixels_.rows(); }
  Resolution resolution() const { return res_; }
  FrameMap frame(Index k) const { return FrameMap(pixels_.row(k).data(), res_.height, res_.width); }
  void set_frame(Index k, const GrayImage& img);

  const Storage& pixels() const { return pixels_; }
  Storage& pixels() { return pixels_; }

 private:
  Resolution res_{};
  Storage pixels_;
};

struct AnnotationSample {
  double time_s = 0.0;
  double value = 0.0;
};

struct RawSession {
  std::string id;
  FrameTrack frames;
  double fps = 30.0;
  AudioClip audio;
  std::vector<AnnotationSample> raw_trace;

  double duration() const { return static_cast<double>(frames.size()) / fps; }

  /// Throws DataError when an invariant of the session does not hold.
  void validate() const;
};

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
};

struct SessionManifest {
  std::vector<ManifestEntry> entries;
  Resolution target;
  double fps = 30.0;
};

/// Parses the manifest JSON. Relative session paths resolve against the
/// manifest's directory.
SessionManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest);

/// Loads `frames/NNNNNN.pgm`, `audio.wav` and `trace.csv` from `dir`,
/// converting frames to gray and resizing them to `target`.
RawSession load_session(const std::filesystem::path& dir, Resolution target, double fps = 30.0,
                        std::string id = {});

/// Loads every manifest entry in order.
std::vector<RawSession> load_dataset(const SessionManifest& manifest);

std::vector<AnnotationSample> read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(const std::filesystem::path& path, const std::vector<AnnotationSample>& trace);

/// Keeps sessions whose frame track lasts at least `min_s` seconds, in order.
std::vector<RawSession> filter_short_sessions(std::vector<RawSession> sessions, double min_s = 15.0);

}  // namespace arousal
