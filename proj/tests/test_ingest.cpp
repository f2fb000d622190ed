#include "arousal/image.hpp"
#include "arousal/ingest.hpp"
#include "arousal/wav.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

using namespace arousal;
using arousal::testing::TempDir;
namespace fs = std::filesystem;

namespace {

void write_frames(const fs::path& dir, int count, int first, Index h, Index w, bool color) {
  fs::create_directories(dir / "frames");
  for (int k = 0; k < count; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.%s", k + first, color ? "ppm" : "pgm");
    if (color) {
      const GrayImage c = GrayImage::Constant(h, w, 255);
      write_ppm(dir / "frames" / name, RgbImage{c, c, c});
    } else {
      write_pgm(dir / "frames" / name, GrayImage::Constant(h, w, static_cast<std::uint8_t>(k)));
    }
  }
}

void write_audio(const fs::path& dir, double seconds) {
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.assign(static_cast<std::size_t>(seconds * 16000), 0.0);
  write_wav(dir / "audio.wav", clip);
}

void write_trace(const fs::path& dir, double seconds) {
  std::vector<AnnotationSample> t;
  for (int k = 0; k < seconds * 4; ++k) t.push_back({k / 4.0, static_cast<double>(k % 7)});
  write_trace_csv(dir / "trace.csv", t);
}

RawSession session_of_frames(Index frames, double fps = 30.0) {
  RawSession s;
  s.frames = FrameTrack(frames, {4, 4});
  s.fps = fps;
  return s;
}

}  // namespace

TEST(LoadSession, ColorFramesBecomeGrayAtTarget) {
  TempDir dir;
  write_frames(dir.path(), 6, 0, 144, 192, true);
  write_audio(dir.path(), 0.2);
  write_trace(dir.path(), 1);
  const RawSession s = load_session(dir.path(), {72, 96}, 30.0, "x");
  EXPECT_EQ(s.id, "x");
  ASSERT_EQ(s.frames.size(), 6);
  EXPECT_EQ(s.frames.resolution().height, 72);
  EXPECT_EQ(s.frames.resolution().width, 96);
  EXPECT_TRUE((s.frames.pixels().array() == 255).all());
  EXPECT_EQ(s.raw_trace.size(), 4u);
}

TEST(LoadSession, OneBasedNumberingAccepted) {
  TempDir dir;
  write_frames(dir.path(), 3, 1, 8, 8, false);
  write_audio(dir.path(), 0.1);
  write_trace(dir.path(), 1);
  const RawSession s = load_session(dir.path(), {8, 8});
  ASSERT_EQ(s.frames.size(), 3);
  EXPECT_EQ(s.frames.frame(2)(0, 0), 2);
}

TEST(LoadSession, GapNamesMissingFrame) {
  TempDir dir;
  write_frames(dir.path(), 4, 0, 8, 8, false);
  fs::remove(dir.path() / "frames" / "000002.pgm");
  write_audio(dir.path(), 0.2);
  write_trace(dir.path(), 1);
  try {
    load_session(dir.path(), {8, 8});
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(e.path().find("000002.pgm"), std::string::npos) << e.what();
  }
}

TEST(LoadSession, MissingAudioNamesFile) {
  TempDir dir;
  write_frames(dir.path(), 2, 0, 8, 8, false);
  write_trace(dir.path(), 1);
  try {
    load_session(dir.path(), {8, 8});
    FAIL() << "expected LoadError";
  } catch (const LoadError& e) {
    EXPECT_NE(e.path().find("audio.wav"), std::string::npos);
  }
}

TEST(LoadSession, EmptyFramesDirectoryIsEmptySessionError) {
  TempDir dir;
  fs::create_directories(dir.path() / "frames");
  write_audio(dir.path(), 0.1);
  write_trace(dir.path(), 1);
  EXPECT_THROW(load_session(dir.path(), {8, 8}), DataError);
}

TEST(LoadSession, ShortAudioRejected) {
  TempDir dir;
  write_frames(dir.path(), 30, 0, 8, 8, false);
  write_audio(dir.path(), 0.5);
  write_trace(dir.path(), 1);
  EXPECT_THROW(load_session(dir.path(), {8, 8}), DataError);
}

TEST(TraceCsv, RoundTrip) {
  TempDir dir;
  const std::vector<AnnotationSample> t{{0.0, -1.5}, {0.25, 3.0}, {0.5, 1e-3}};
  write_trace_csv(dir / "t.csv", t);
  const auto back = read_trace_csv(dir / "t.csv");
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back[k].time_s, t[k].time_s);
    EXPECT_EQ(back[k].value, t[k].value);
  }
}

TEST(TraceCsv, NonIncreasingTimesRejected) {
  TempDir dir;
  std::ofstream(dir / "t.csv") << "time_s,value\n0,1\n0,2\n";
  const RawSession s{"s", FrameTrack(1, {1, 1}), 30.0, {{0.0}, 16000}, read_trace_csv(dir / "t.csv")};
  EXPECT_ANY_THROW(s.validate());
}

TEST(Manifest, RelativePathsResolveAgainstManifest) {
  TempDir dir;
  fs::create_directories(dir / "sub");
  std::ofstream(dir / "sub" / "m.json") << R"({"height": 36, "width": 48, "sessions": [{"id": "a", "path": "a"}]})";
  const SessionManifest m = load_manifest(dir / "sub" / "m.json");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].path, dir / "sub" / "a");
  EXPECT_EQ(m.target.height, 36);
  EXPECT_EQ(m.target.width, 48);
  EXPECT_EQ(m.fps, 30.0);
}

TEST(Manifest, DuplicateIdsRejected) {
  TempDir dir;
  std::ofstream(dir / "m.json") << R"({"sessions": [{"id": "a", "path": "x"}, {"id": "a", "path": "y"}]})";
  EXPECT_THROW(load_manifest(dir / "m.json"), LoadError);
}

TEST(Manifest, WriteThenLoad) {
  TempDir dir;
  SessionManifest m;
  m.target = {72, 115};
  m.entries = {{"one", "one"}, {"two", "two"}};
  write_manifest(dir / "m.json", m);
  const SessionManifest back = load_manifest(dir / "m.json");
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].id, "two");
  EXPECT_EQ(back.target.width, 115);
}

TEST(Manifest, MissingFileIsLoadErrorNamingIt) {
  try {
    load_manifest("/definitely/not/here.json");
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.path(), "/definitely/not/here.json");
  }
}

TEST(FilterShortSessions, BoundaryIsInclusive) {
  std::vector<RawSession> in;
  for (const Index n : {1800, 420, 450}) in.push_back(session_of_frames(n));
  in[0].id = "60";
  in[1].id = "14";
  in[2].id = "15";
  const auto out = filter_short_sessions(in, 15.0);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, "60");
  EXPECT_EQ(out[1].id, "15");
}

TEST(FilterShortSessions, EmptyInput) { EXPECT_TRUE(filter_short_sessions({}, 15.0).empty()); }

TEST(FilterShortSessions, JustUnderFifteenSecondsDropped) {
  EXPECT_TRUE(filter_short_sessions({session_of_frames(449)}, 15.0).empty());
}

TEST(FilterShortSessions, SubsetAndMonotoneInThreshold) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RawSession> in;
    for (int k = 0; k < 8; ++k) {
      in.push_back(session_of_frames(static_cast<Index>(rng() % 900 + 1)));
      in.back().id = std::to_string(k);
    }
    std::size_t previous = in.size() + 1;
    for (const double m : {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0}) {
      const auto out = filter_short_sessions(in, m);
      EXPECT_LE(out.size(), previous);
      previous = out.size();
      for (const auto& s : out) EXPECT_GE(s.duration(), m);
    }
  }
}
