#include "arousal/ingest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace arousal {

namespace fs = std::filesystem;
using nlohmann::json;

void FrameTrack::set_frame(Index k, const GrayImage& img) {
  if (img.rows() != res_.height || img.cols() != res_.width)
    throw ShapeError("frame " + std::to_string(k) + " has wrong dimensions");
  pixels_.row(k) = Eigen::Map<const Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic>>(img.data(), img.size());
}

void RawSession::validate() const {
  if (frames.size() == 0) throw DataError("session '" + id + "' has no frames");
  if (fps <= 0.0) throw DataError("session '" + id + "' has non-positive fps");
  if (audio.duration() + 1e-9 < duration() - 1.0 / fps)
    throw DataError("session '" + id + "' audio is shorter than its frame track");
  if (raw_trace.empty()) throw DataError("session '" + id + "' has an empty annotation trace");
  for (std::size_t k = 1; k < raw_trace.size(); ++k)
    if (!(raw_trace[k].time_s > raw_trace[k - 1].time_s))
      throw DataError("session '" + id + "' trace timestamps are not strictly increasing");
}

SessionManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), "cannot open manifest");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw LoadError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  SessionManifest m;
  try {
    m.target.height = j.value("height", Index{72});
    m.target.width = j.value("width", Index{96});
    m.fps = j.value("fps", 30.0);
    std::set<std::string> seen;
    for (const auto& e : j.at("sessions")) {
      ManifestEntry entry{e.at("id").get<std::string>(), fs::path(e.at("path").get<std::string>())};
      if (entry.path.is_relative()) entry.path = path.parent_path() / entry.path;
      if (!seen.insert(entry.id).second) throw LoadError(path.string(), "duplicate session id '" + entry.id + "'");
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw LoadError(path.string(), std::string("malformed manifest: ") + e.what());
  }
  if (m.target.height <= 0 || m.target.width <= 0 || m.fps <= 0)
    throw LoadError(path.string(), "invalid resolution or fps");
  return m;
}

void write_manifest(const fs::path& path, const SessionManifest& manifest) {
  json j;
  j["height"] = manifest.target.height;
  j["width"] = manifest.target.width;
  j["fps"] = manifest.fps;
  j["sessions"] = json::array();
  for (const auto& e : manifest.entries) {
    fs::path p = e.path;
    if (p.is_absolute() && !path.parent_path().empty()) p = fs::relative(p, fs::absolute(path.parent_path()));
    j["sessions"].push_back({{"id", e.id}, {"path", p.generic_string()}});
  }
  std::ofstream out(path);
  if (!out) throw LoadError(path.string(), "cannot open for writing");
  out << j.dump(2) << '\n';
}

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Frame files keyed by their number; accepts .pgm and .ppm.
std::map<long, fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw LoadError(dir.string(), "missing frames directory");
  std::map<long, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (ext != ".pgm" && ext != ".ppm") continue;
    const auto stem = entry.path().stem().string();
    long number = 0;
    const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), number);
    if (ec != std::errc() || ptr != stem.data() + stem.size()) continue;
    out.emplace(number, entry.path());
  }
  return out;
}

}  // namespace

std::vector<AnnotationSample> read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string(), "cannot open trace");
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string(), "empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "time_s,value") throw LoadError(path.string(), "expected header 'time_s,value'");
  std::vector<AnnotationSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    AnnotationSample s;
    if (comma == std::string::npos || !parse_double(std::string_view(line).substr(0, comma), s.time_s) ||
        !parse_double(std::string_view(line).substr(comma + 1), s.value))
      throw LoadError(path.string(), "malformed row at line " + std::to_string(lineno));
    out.push_back(s);
  }
  if (out.empty()) throw LoadError(path.string(), "trace has no samples");
  return out;
}

void write_trace_csv(const fs::path& path, const std::vector<AnnotationSample>& trace) {
  std::ofstream out(path);
  if (!out) throw LoadError(path.string(), "cannot open for writing");
  out << "time_s,value\n";
  out.precision(17);
  for (const auto& s : trace) out << s.time_s << ',' << s.value << '\n';
}

RawSession load_session(const fs::path& dir, Resolution target, double fps, std::string id) {
  RawSession session;
  session.id = id.empty() ? dir.filename().string() : std::move(id);
  session.fps = fps;

  const auto files = list_frames(dir / "frames");
  if (files.empty()) throw DataError("session '" + session.id + "' has no frames in " + (dir / "frames").string());
  const long first = files.begin()->first;
  if (first != 0 && first != 1) throw LoadError(files.begin()->second.string(), "frame numbering must start at 0 or 1");
  session.frames = FrameTrack(static_cast<Index>(files.size()), target);
  long expected = first;
  for (const auto& [number, file] : files) {
    if (number != expected) {
      char name[32];
      std::snprintf(name, sizeof name, "%06ld.pgm", expected);
      throw LoadError((dir / "frames" / name).string(), "missing frame");
    }
    session.frames.set_frame(number - first, resize_bilinear(read_pnm(file), target.height, target.width));
    ++expected;
  }

  session.audio = read_wav(dir / "audio.wav");
  session.raw_trace = read_trace_csv(dir / "trace.csv");
  session.validate();
  return session;
}

std::vector<RawSession> load_dataset(const SessionManifest& manifest) {
  std::vector<RawSession> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out.push_back(load_session(e.path, manifest.target, manifest.fps, e.id));
  return out;
}

std::vector<RawSession> filter_short_sessions(std::vector<RawSession> sessions, double min_s) {
  std::vector<RawSession> kept;
  for (auto& s : sessions)
    if (s.duration() >= min_s) kept.push_back(std::move(s));
  return kept;
}

}  // namespace arousal
