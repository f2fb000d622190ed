#include "arousal/cli.hpp"

#include "arousal/checkpoint.hpp"
#include "arousal/experiment.hpp"
#include "arousal/image.hpp"
#include "arousal/ingest.hpp"
#include "arousal/synth.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace arousal::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSpec {
  std::string command;
  std::string manifest;
  std::string out;
  bool force = false;
  ExperimentConfig exp;
  std::optional<double> dtw_threshold;
  double min_duration = 15.0;
  std::string axis;
  std::vector<std::string> values;
  std::string test_session;
  std::string checkpoint;
  std::string session;
  std::vector<Index> segments{0};
  int target = 1;
  SynthConfig synth;
  std::string from;
};

json snapshot(const RunSpec& r) {
  json j{{"command", r.command}};
  if (r.command == "synth") {
    const auto& s = r.synth;
    j["synth"] = {{"sessions", s.sessions},           {"duration_s", s.duration_s},
                  {"fps", s.fps},                     {"sample_rate", s.sample_rate},
                  {"height", s.resolution.height},    {"width", s.resolution.width},
                  {"event_rate", s.event_rate},       {"calm_gain", s.calm_gain},
                  {"intense_gain", s.intense_gain},   {"phase_dwell_s", s.phase_dwell_s},
                  {"kernel_amplitude", s.kernel_amplitude}, {"kernel_tau_s", s.kernel_tau_s},
                  {"pixel_noise", s.pixel_noise},     {"audio_noise", s.audio_noise},
                  {"burst_amplitude", s.burst_amplitude}, {"coupling", to_string(s.coupling)},
                  {"seed", s.seed}};
    return j;
  }
  j["manifest"] = r.manifest;
  j["min_duration_s"] = r.min_duration;
  j["dtw_threshold"] = r.dtw_threshold ? json(*r.dtw_threshold) : json(nullptr);
  if (r.command == "preprocess") return j;
  j["experiment"] = to_json(r.exp);
  if (r.command == "sweep") {
    j["axis"] = r.axis;
    j["values"] = r.values;
  }
  if (r.command == "train") j["test_session"] = r.test_session;
  if (r.command == "gcam") {
    j["checkpoint"] = r.checkpoint;
    j["session"] = r.session;
    j["segments"] = r.segments;
    j["target"] = r.target;
  }
  return j;
}

void apply_snapshot(RunSpec& r, const json& j) {
  try {
    if (j.at("command").get<std::string>() != r.command)
      throw UsageError("snapshot was written by '" + j.at("command").get<std::string>() + "', not '" + r.command + "'");
    r.manifest = j.at("manifest").get<std::string>();
    r.min_duration = j.at("min_duration_s").get<double>();
    r.dtw_threshold = j.at("dtw_threshold").is_null() ? std::nullopt
                                                      : std::optional<double>(j.at("dtw_threshold").get<double>());
    const int jobs = r.exp.jobs;
    r.exp = config_from_json(j.at("experiment"));
    r.exp.jobs = jobs;
    if (r.command == "sweep") {
      r.axis = j.at("axis").get<std::string>();
      r.values = j.at("values").get<std::vector<std::string>>();
    }
    if (r.command == "train") r.test_session = j.at("test_session").get<std::string>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed config snapshot: ") + e.what());
  }
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw LoadError(path.string(), "cannot open for writing");
  f << text;
  if (!f) throw LoadError(path.string(), "write failed");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void prepare_out_dir(const std::string& out, bool force) {
  if (out.empty()) throw UsageError("--out is required");
  const fs::path dir(out);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw UsageError("output path '" + out + "' exists and is not a directory");
    if (!fs::is_empty(dir) && !force)
      throw UsageError("output directory '" + out + "' is not empty (pass --force to overwrite)");
  }
  fs::create_directories(dir);
}

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t flag_value) {
  if (opt->count() > 0) return flag_value;
  const char* env = std::getenv("AROUSAL_FORGE_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("AROUSAL_FORGE_SEED='") + env + "' is not a non-negative integer");
  }
}

std::vector<PreparedSession> load_clean(const RunSpec& r, std::ostream& out, bool verbose = false) {
  const SessionManifest manifest = load_manifest(r.manifest);
  CleanedDataset clean = clean_dataset(load_dataset(manifest), r.min_duration, r.dtw_threshold);
  for (const auto& v : clean.verdicts)
    if (!v.retained || verbose)
      out << (v.retained ? "retained " : "dropped  ") << v.id << (v.reason.empty() ? "" : " (" + v.reason + ")")
          << '\n';
  return std::move(clean.sessions);
}

struct Run {
  RunSpec spec;
  std::vector<std::string> argv;
  std::string started;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void begin() {
    started = utc_now();
    prepare_out_dir(spec.out, spec.force);
    write_json(fs::path(spec.out) / "config.json", snapshot(spec));
  }
  void finish() const {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json(fs::path(spec.out) / "run_info.json",
               {{"argv", argv}, {"started_utc", started}, {"finished_utc", utc_now()}, {"elapsed_s", elapsed}});
  }
};

void print_summary(const ExperimentReport& r, std::ostream& out) {
  const auto& s = r.summary;
  out << std::fixed << std::setprecision(4) << "mean accuracy " << s.mean_accuracy << " +/- " << s.accuracy_ci
      << " (baseline " << s.mean_baseline << ")";
  if (s.mean_tau) out << ", mean tau " << *s.mean_tau << " +/- " << s.tau_ci;
  out << ", folds " << s.folds - s.failed_folds << "/" << s.folds << '\n';
  out.unsetf(std::ios::floatfield);
}

int cmd_synth(Run& run, std::ostream& out) {
  run.begin();
  const fs::path manifest = write_dataset(run.spec.synth, run.spec.out);
  run.finish();
  out << "wrote " << run.spec.synth.sessions << " sessions; manifest " << manifest.string() << '\n';
  return kExitOk;
}

int cmd_preprocess(Run& run, std::ostream& out) {
  const RunSpec& r = run.spec;
  const SessionManifest manifest = load_manifest(r.manifest);
  const CleanedDataset clean = clean_dataset(load_dataset(manifest), r.min_duration, r.dtw_threshold);
  json verdicts = json::array();
  out << std::left << std::setw(24) << "session" << std::setw(12) << "duration_s" << std::setw(14) << "dtw_distance"
      << "status\n";
  for (const auto& v : clean.verdicts) {
    std::ostringstream d;
    if (v.dtw_distance) d << std::setprecision(6) << *v.dtw_distance;
    else d << "-";
    out << std::left << std::setw(24) << v.id << std::setw(12) << std::setprecision(4) << v.duration_s << std::setw(14)
        << d.str() << (v.retained ? "retained" : "dropped (" + v.reason + ")") << '\n';
    verdicts.push_back({{"id", v.id},
                        {"duration_s", v.duration_s},
                        {"dtw_distance", v.dtw_distance ? json(*v.dtw_distance) : json(nullptr)},
                        {"retained", v.retained},
                        {"reason", v.reason}});
  }
  out << clean.sessions.size() << " of " << clean.verdicts.size() << " sessions retained\n";
  if (!r.out.empty()) {
    run.begin();
    write_json(fs::path(r.out) / "preprocess.json", {{"sessions", verdicts}});
    run.finish();
  }
  return kExitOk;
}

json fold_json(const FoldResult& f) {
  ExperimentReport tmp;
  tmp.folds.push_back(f);
  return to_json(tmp).at("folds").at(0);
}

int cmd_train(Run& run, std::ostream& out, std::ostream& err) {
  RunSpec& r = run.spec;
  const auto sessions = load_clean(r, out);
  const SegmentedDataset data = segment_dataset(sessions, r.exp.window_s);
  const auto splits = lovo_splits(data.ids, r.exp.validation_sessions, r.exp.seed);
  if (r.test_session.empty()) r.test_session = data.ids.front();
  const auto it = std::find_if(splits.begin(), splits.end(), [&](const Split& s) { return s.test == r.test_session; });
  if (it == splits.end()) throw DataError("test session '" + r.test_session + "' is not in the cleaned dataset");
  run.begin();
  std::unique_ptr<ArousalNet<double>> net;
  const FoldResult f = run_fold(data, *it, static_cast<std::size_t>(it - splits.begin()), r.exp, &net);
  write_json(fs::path(r.out) / "train_report.json",
             {{"config", to_json(r.exp)}, {"split", {{"train", it->train}, {"validation", it->validation}, {"test", it->test}}},
              {"result", fold_json(f)}});
  if (f.failed) {
    run.finish();
    err << "error: training failed: " << f.error << '\n';
    return kExitData;
  }
  save_checkpoint(fs::path(r.out) / "model.ckpt", *net, snapshot(r));
  run.finish();
  out << std::fixed << std::setprecision(4) << "test " << f.test_session << ": accuracy " << f.accuracy << " (baseline "
      << f.baseline << "), epochs " << f.epochs_trained << ", best " << f.best_epoch << '\n';
  return kExitOk;
}

int cmd_crossval(Run& run, std::ostream& out) {
  const RunSpec& r = run.spec;
  const auto sessions = load_clean(r, out);
  run.begin();
  RunOptions opts;
  opts.log = [&](const std::string& line) { out << line << '\n' << std::flush; };
  const ExperimentReport report = run_experiment(sessions, r.exp, opts);
  write_json(fs::path(r.out) / "report.json", to_json(report));
  run.finish();
  print_summary(report, out);
  if (report.summary.failed_folds == report.summary.folds) throw DataError("every fold failed");
  return kExitOk;
}

int cmd_sweep(Run& run, std::ostream& out) {
  RunSpec& r = run.spec;
  const SweepAxis axis = parse_sweep_axis(r.axis);
  if (r.values.empty()) r.values = default_sweep_values(axis);
  for (const auto& v : r.values) {
    try {
      apply_sweep_value(r.exp, axis, v);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  const auto sessions = load_clean(r, out);
  run.begin();
  RunOptions opts;
  opts.log = [&](const std::string& line) { out << line << '\n' << std::flush; };
  const auto reports = sweep(sessions, r.exp, axis, r.values, opts);
  json all = json::array();
  for (const auto& rep : reports) all.push_back(to_json(rep));
  write_json(fs::path(r.out) / "sweep.json", {{"axis", r.axis}, {"values", r.values}, {"reports", all}});
  write_text(fs::path(r.out) / "curve.csv", curve_csv(axis, reports));
  run.finish();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    out << r.axis << "=" << r.values[k] << ": ";
    print_summary(reports[k], out);
  }
  return kExitOk;
}

int cmd_gcam(Run& run, std::ostream& out) {
  RunSpec& r = run.spec;
  LoadedCheckpoint ck = load_checkpoint(r.checkpoint);
  const NetConfig& nc = ck.net.config();
  if (!uses_visual(nc.modality)) throw UnsupportedError("Grad-CAM needs a network with a visual stream");
  const SessionManifest manifest = load_manifest(r.manifest);
  auto entry = std::find_if(manifest.entries.begin(), manifest.entries.end(),
                            [&](const ManifestEntry& e) { return r.session.empty() || e.id == r.session; });
  if (entry == manifest.entries.end()) throw DataError("session '" + r.session + "' is not in the manifest");
  r.session = entry->id;
  if (manifest.target.height != nc.resolution.height || manifest.target.width != nc.resolution.width)
    throw DataError("manifest resolution does not match the checkpoint");
  const PreparedSession session = prepare_session(load_session(entry->path, manifest.target, manifest.fps, entry->id));
  double window_s = static_cast<double>(nc.frames) / session.fps;
  if (ck.run_config.contains("experiment")) window_s = ck.run_config["experiment"].value("window_s", window_s);
  const auto segs = segment_session(session, window_s);
  run.begin();
  for (const Index k : r.segments) {
    if (k < 0 || k >= static_cast<Index>(segs.size()))
      throw DataError("segment " + std::to_string(k) + " is out of range (session has " + std::to_string(segs.size()) +
                      " segments)");
    const Segment& seg = segs[static_cast<std::size_t>(k)];
    const auto in = make_input<double>(seg, nc.modality);
    const GradCamMap cam = grad_cam(ck.net, in, r.target);
    GrayImage img(cam.heatmap.rows(), cam.heatmap.cols());
    for (Index y = 0; y < img.rows(); ++y)
      for (Index x = 0; x < img.cols(); ++x)
        img(y, x) = static_cast<std::uint8_t>(std::lround(std::clamp(cam.heatmap(y, x), 0.0, 1.0) * 255.0));
    const std::string stem = r.session + "_seg" + std::to_string(k);
    write_pgm(fs::path(r.out) / (stem + ".pgm"), img);
    json coarse = json::array();
    for (Index y = 0; y < cam.coarse.rows(); ++y) {
      json row = json::array();
      for (Index x = 0; x < cam.coarse.cols(); ++x) row.push_back(cam.coarse(y, x));
      coarse.push_back(row);
    }
    write_json(fs::path(r.out) / (stem + ".json"), {{"session", r.session},
                                                    {"segment", k},
                                                    {"start_frame", seg.span.start},
                                                    {"frames", seg.span.length},
                                                    {"target", cam.target},
                                                    {"height", img.rows()},
                                                    {"width", img.cols()},
                                                    {"score", predict_score(ck.net, in)},
                                                    {"mean_arousal", seg.mean_arousal},
                                                    {"coarse", coarse}});
    out << "wrote " << (fs::path(r.out) / (stem + ".pgm")).string() << '\n';
  }
  run.finish();
  return kExitOk;
}

void add_data_flags(CLI::App* sub, RunSpec& r) {
  sub->add_option("--manifest", r.manifest, "Dataset manifest (JSON)");
  sub->add_option("--min-duration", r.min_duration, "Drop sessions shorter than this many seconds");
  sub->add_option("--dtw-threshold", r.dtw_threshold, "Drop sessions whose DTW distance to the median trace exceeds this");
}

void add_experiment_flags(CLI::App* sub, RunSpec& r, std::string& mode, std::string& modality) {
  auto& e = r.exp;
  sub->add_option("--mode", mode, "classify or rank")->check(CLI::IsMember({"classify", "rank", "classifier", "ranker"}));
  sub->add_option("--modality", modality, "visual, audio or both")->check(CLI::IsMember({"visual", "audio", "both"}));
  sub->add_option("--window", e.window_s, "Window length in seconds")->check(CLI::PositiveNumber);
  sub->add_option("--epsilon", e.epsilon, "Uncertainty band half-width for classification")->check(CLI::NonNegativeNumber);
  sub->add_option("--delta", e.delta, "Minimum mean-arousal gap for preference pairs")->check(CLI::NonNegativeNumber);
  sub->add_option("--jobs", e.jobs, "Folds trained in parallel")->check(CLI::PositiveNumber);
  sub->add_option("--max-epochs", e.optimizer.max_epochs, "Epoch cap")->check(CLI::PositiveNumber);
  sub->add_option("--patience", e.patience, "Epochs without validation improvement before stopping")
      ->check(CLI::PositiveNumber);
  sub->add_option("--validation-sessions", e.validation_sessions, "Validation sessions per fold")
      ->check(CLI::PositiveNumber);
  sub->add_option("--batch-size", e.optimizer.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  sub->add_option("--lr", e.optimizer.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  sub->add_option("--from", r.from, "Re-run from a config.json snapshot (other run flags except --out, --force, --jobs are ignored)");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Arousal models from gameplay footage and audio", "arousal"};
  app.require_subcommand(1);
  app.fallthrough(false);

  RunSpec r;
  std::string mode = "classify", modality = "both", coupling = "both";
  std::uint64_t seed = 0;
  std::string values_csv;
  std::vector<CLI::Option*> seed_opts;

  auto common = [&](CLI::App* sub, bool out_required) {
    auto* o = sub->add_option("--out", r.out, "Output directory");
    if (out_required) o->required();
    sub->add_flag("--force", r.force, "Allow writing into a non-empty output directory");
    seed_opts.push_back(sub->add_option("--seed", seed, "Base seed (falls back to AROUSAL_FORGE_SEED, then 0)"));
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  common(synth, true);
  auto& s = r.synth;
  synth->add_option("--sessions", s.sessions, "Number of sessions")->check(CLI::PositiveNumber);
  synth->add_option("--duration", s.duration_s, "Session length in seconds");
  synth->add_option("--fps", s.fps, "Frame rate");
  synth->add_option("--sample-rate", s.sample_rate, "Audio sample rate");
  synth->add_option("--height", s.resolution.height, "Frame height");
  synth->add_option("--width", s.resolution.width, "Frame width");
  synth->add_option("--event-rate", s.event_rate, "Base event rate (events/s)");
  synth->add_option("--calm-gain", s.calm_gain, "Rate multiplier in calm phases");
  synth->add_option("--intense-gain", s.intense_gain, "Rate multiplier in intense phases");
  synth->add_option("--phase-dwell", s.phase_dwell_s, "Mean phase length in seconds");
  synth->add_option("--tau", s.kernel_tau_s, "Arousal kernel time constant in seconds");
  synth->add_option("--amplitude", s.kernel_amplitude, "Arousal kernel amplitude");
  synth->add_option("--pixel-noise", s.pixel_noise, "Pixel noise standard deviation (gray levels)");
  synth->add_option("--audio-noise", s.audio_noise, "Audio noise-bed standard deviation");
  synth->add_option("--burst-amplitude", s.burst_amplitude, "Tone burst amplitude");
  synth->add_option("--coupling", coupling, "visual_only, audio_only or both")
      ->check(CLI::IsMember({"visual_only", "audio_only", "both"}));

  auto* pre = app.add_subcommand("preprocess", "Report duration and DTW cleaning verdicts");
  common(pre, false);
  add_data_flags(pre, r);

  auto* train = app.add_subcommand("train", "Fit one model on a fixed split");
  common(train, true);
  add_data_flags(train, r);
  add_experiment_flags(train, r, mode, modality);
  train->add_option("--test", r.test_session, "Held-out session (default: first session)");

  auto* cv = app.add_subcommand("crossval", "Leave-one-video-out cross-validation");
  common(cv, true);
  add_data_flags(cv, r);
  add_experiment_flags(cv, r, mode, modality);

  auto* sw = app.add_subcommand("sweep", "Cross-validation over one parameter axis");
  common(sw, true);
  add_data_flags(sw, r);
  add_experiment_flags(sw, r, mode, modality);
  sw->add_option("--axis", r.axis, "epsilon, delta, window or modality")
      ->required()
      ->check(CLI::IsMember({"epsilon", "delta", "window", "modality"}));
  sw->add_option("--values", values_csv, "Comma-separated axis values (default: the axis's standard grid)");

  auto* gc = app.add_subcommand("gcam", "Grad-CAM heatmaps for chosen segments");
  common(gc, true);
  gc->add_option("--checkpoint", r.checkpoint, "Model checkpoint")->required();
  gc->add_option("--manifest", r.manifest, "Dataset manifest (JSON)")->required();
  gc->add_option("--session", r.session, "Session id (default: first in manifest)");
  gc->add_option("--segments", r.segments, "Segment indices")->delimiter(',');
  gc->add_option("--target", r.target, "Output neuron (0 or 1)")->check(CLI::Range(0, 1));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Run run;
  run.argv = args;
  try {
    CLI::App* sub = app.get_subcommands().front();
    r.command = sub->get_name();
    const CLI::Option* seed_opt = sub->get_option("--seed");
    r.exp.seed = r.synth.seed = resolve_seed(seed_opt, seed);
    r.synth.coupling = parse_coupling(coupling);
    r.exp.mode = parse_mode(mode);
    r.exp.modality = parse_modality(modality);
    if (!values_csv.empty()) {
      std::stringstream ss(values_csv);
      for (std::string v; std::getline(ss, v, ',');)
        if (!v.empty()) r.values.push_back(v);
    }
    if (!r.from.empty()) {
      std::ifstream f(r.from);
      if (!f) throw LoadError(r.from, "cannot open config snapshot");
      json j;
      try {
        j = json::parse(f);
      } catch (const json::exception& e) {
        throw LoadError(r.from, std::string("malformed JSON: ") + e.what());
      }
      apply_snapshot(r, j);
    }
    if (r.command != "synth" && r.manifest.empty()) throw UsageError("--manifest is required");
    try {
      if (r.command == "synth") r.synth.validate();
      else r.exp.validate();
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    run.spec = r;
    if (r.command == "synth") return cmd_synth(run, out);
    if (r.command == "preprocess") return cmd_preprocess(run, out);
    if (r.command == "train") return cmd_train(run, out, err);
    if (r.command == "crossval") return cmd_crossval(run, out);
    if (r.command == "sweep") return cmd_sweep(run, out);
    if (r.command == "gcam") return cmd_gcam(run, out);
    throw UsageError("unknown command");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const LoadError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace arousal::cli
