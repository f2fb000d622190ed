#include "arousal/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace arousal {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (patience < 1) throw DataError("experiment: patience must be >= 1");
  if (validation_sessions < 1) throw DataError("experiment: at least one validation session is required");
  if (!(window_s > 0.0)) throw DataError("experiment: window must be positive");
  if (epsilon < 0.0 || delta < 0.0) throw DataError("experiment: thresholds must be >= 0");
  if (jobs < 1) throw DataError("experiment: jobs must be >= 1");
  optimizer.validate();
}

json to_json(const ExperimentConfig& cfg) {
  const auto& o = cfg.optimizer;
  return json{
      {"mode", to_string(cfg.mode)},
      {"modality", to_string(cfg.modality)},
      {"window_s", cfg.window_s},
      {"epsilon", cfg.epsilon},
      {"delta", cfg.delta},
      {"patience", cfg.patience},
      {"validation_sessions", cfg.validation_sessions},
      {"seed", cfg.seed},
      {"optimizer",
       {{"kind", o.kind == nn::OptimizerConfig::Kind::adam ? "adam" : "sgd"},
        {"learning_rate", o.learning_rate},
        {"beta1", o.beta1},
        {"beta2", o.beta2},
        {"epsilon", o.epsilon},
        {"batch_size", o.batch_size},
        {"max_epochs", o.max_epochs}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.mode = parse_mode(j.at("mode").get<std::string>());
    cfg.modality = parse_modality(j.at("modality").get<std::string>());
    cfg.window_s = j.at("window_s").get<double>();
    cfg.epsilon = j.at("epsilon").get<double>();
    cfg.delta = j.at("delta").get<double>();
    cfg.patience = j.at("patience").get<Index>();
    cfg.validation_sessions = j.at("validation_sessions").get<Index>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    const json& o = j.at("optimizer");
    const auto kind = o.at("kind").get<std::string>();
    if (kind != "adam" && kind != "sgd") throw DataError("unknown optimizer '" + kind + "'");
    cfg.optimizer.kind = kind == "adam" ? nn::OptimizerConfig::Kind::adam : nn::OptimizerConfig::Kind::sgd;
    cfg.optimizer.learning_rate = o.at("learning_rate").get<double>();
    cfg.optimizer.beta1 = o.at("beta1").get<double>();
    cfg.optimizer.beta2 = o.at("beta2").get<double>();
    cfg.optimizer.epsilon = o.at("epsilon").get<double>();
    cfg.optimizer.batch_size = o.at("batch_size").get<Index>();
    cfg.optimizer.max_epochs = o.at("max_epochs").get<Index>();
  } catch (const json::exception& e) {
    throw DataError(std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<Split> lovo_splits(std::span<const std::string> session_ids, Index validation, std::uint64_t seed) {
  const auto n = static_cast<Index>(session_ids.size());
  if (validation < 1) throw DataError("lovo_splits: at least one validation session is required");
  if (n < validation + 2)
    throw DataError("lovo_splits: need at least " + std::to_string(validation + 2) + " sessions, got " +
                    std::to_string(n));
  std::set<std::string> unique(session_ids.begin(), session_ids.end());
  if (static_cast<Index>(unique.size()) != n) throw DataError("lovo_splits: duplicate session ids");

  std::vector<Split> splits;
  for (Index fold = 0; fold < n; ++fold) {
    Split s;
    s.test = session_ids[static_cast<std::size_t>(fold)];
    std::vector<std::string> rest;
    for (Index k = 0; k < n; ++k)
      if (k != fold) rest.push_back(session_ids[static_cast<std::size_t>(k)]);
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(fold));
    std::vector<std::size_t> order(rest.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> is_val(rest.size(), false);
    for (Index k = 0; k < validation; ++k) is_val[order[static_cast<std::size_t>(k)]] = true;
    for (std::size_t k = 0; k < rest.size(); ++k) (is_val[k] ? s.validation : s.train).push_back(rest[k]);
    splits.push_back(std::move(s));
  }
  return splits;
}

TrainingData build_training_data(std::span<const std::vector<Segment>* const> sessions, const ExperimentConfig& cfg) {
  TrainingData data;
  for (const auto* segs : sessions) {
    if (cfg.mode == Mode::classifier) {
      for (const auto& ex : label_segments(*segs, cfg.epsilon)) {
        data.segments.push_back(ex.segment);
        data.labels.push_back(ex.label);
      }
    } else {
      const std::size_t offset = data.segments.size();
      for (const auto& seg : *segs) data.segments.push_back(&seg);
      for (auto p : make_pairs(*segs, cfg.delta)) {
        p.first += offset;
        p.second += offset;
        data.pairs.push_back(p);
      }
    }
  }
  return data;
}

namespace {

using Net = ArousalNet<double>;
using Logits = Net::Logits;

void train_classifier_epoch(Net& net, nn::Optimizer<double>& opt, const TrainingData& data, Index batch_size,
                            std::mt19937_64& rng) {
  const Modality modality = net.config().modality;
  std::vector<std::size_t> order(data.labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto batch = static_cast<std::size_t>(batch_size);
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const std::size_t end = std::min(order.size(), begin + batch);
    const double scale = 1.0 / static_cast<double>(end - begin);
    opt.zero_grad();
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t i = order[k];
      const SegmentInput<double> in = make_input<double>(*data.segments[i], modality);
      Net::Cache cache;
      const Logits logits = net.forward(in, &cache);
      const auto lg = nn::softmax_nll<double>(logits, data.labels[i]);
      net.backward(cache, lg.grad * scale);
    }
    opt.step();
  }
}

struct UnorderedPair {
  std::size_t a = 0, b = 0;
  int label = 0;  // 1 when a is preferred
  double weight = 0.0;
};

// Each unordered pair stands for all of its ordered occurrences. The loss of
// (b, a, 1 - y) equals that of (a, b, y) with the same gradient, so an
// occurrence count is enough.
std::vector<UnorderedPair> collapse_pairs(const std::vector<PreferencePair>& pairs) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> index;
  std::vector<UnorderedPair> out;
  for (const auto& p : pairs) {
    const bool canonical = p.first < p.second;
    const auto key = canonical ? std::pair{p.first, p.second} : std::pair{p.second, p.first};
    const int label = canonical ? p.label : 1 - p.label;
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) {
      out.push_back({key.first, key.second, label, 0.0});
    } else if (out[it->second].label != label) {
      throw DataError("preference pairs: contradictory labels for one segment pair");
    }
    out[it->second].weight += 1.0;
  }
  return out;
}

void train_ranker_epoch(Net& net, nn::Optimizer<double>& opt, const TrainingData& data,
                        std::vector<UnorderedPair>& pairs, Index batch_size, std::mt19937_64& rng) {
  const Modality modality = net.config().modality;
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const auto target = static_cast<double>(batch_size);
  std::size_t begin = 0;
  while (begin < pairs.size()) {
    std::size_t end = begin;
    double total = 0.0;
    while (end < pairs.size() && total < target) total += pairs[end++].weight;

    std::map<std::size_t, std::size_t> slot;
    for (std::size_t k = begin; k < end; ++k)
      for (const std::size_t s : {pairs[k].a, pairs[k].b}) slot.try_emplace(s, slot.size());
    std::vector<SegmentInput<double>> inputs(slot.size());
    std::vector<Net::Cache> caches(slot.size());
    std::vector<Logits> logits(slot.size());
    std::vector<Logits> upstream(slot.size(), Logits::Zero());
    for (const auto& [seg, s] : slot) {
      inputs[s] = make_input<double>(*data.segments[seg], modality);
      logits[s] = net.forward(inputs[s], &caches[s]);
    }
    for (std::size_t k = begin; k < end; ++k) {
      const auto& p = pairs[k];
      const std::size_t sa = slot.at(p.a), sb = slot.at(p.b);
      const auto lg = nn::softmax_nll<double>((logits[sa] - logits[sb]).eval(), p.label);
      const Logits g = lg.grad * (p.weight / total);
      upstream[sa] += g;
      upstream[sb] -= g;
    }
    opt.zero_grad();
    for (std::size_t s = 0; s < slot.size(); ++s) net.backward(caches[s], upstream[s]);
    opt.step();
    begin = end;
  }
}

std::vector<std::vector<double>> snapshot_values(Net& net) {
  std::vector<std::vector<double>> out;
  for (const auto* p : net.parameters()) out.emplace_back(p->value.data().begin(), p->value.data().end());
  return out;
}

void restore_values(Net& net, const std::vector<std::vector<double>>& values) {
  auto params = net.parameters();
  for (std::size_t k = 0; k < params.size(); ++k)
    std::copy(values[k].begin(), values[k].end(), params[k]->value.data().begin());
}

}  // namespace

std::vector<double> score_segments(const ArousalNet<double>& net, std::span<const Segment* const> segments) {
  std::vector<double> out;
  out.reserve(segments.size());
  for (const auto* seg : segments) out.push_back(predict_score(net, make_input<double>(*seg, net.config().modality)));
  return out;
}

double evaluate_accuracy(const ArousalNet<double>& net, const TrainingData& data) {
  const Mode mode = net.config().mode;
  const Index n = data.size(mode);
  if (n == 0) throw DataError("evaluate_accuracy: no examples");
  Index correct = 0;
  if (mode == Mode::classifier) {
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
      const Logits f = net.forward(make_input<double>(*data.segments[i], net.config().modality));
      const int predicted = f(1) > f(0) ? 1 : 0;
      correct += predicted == data.labels[i];
    }
  } else {
    const std::vector<double> score = score_segments(net, data.segments);
    for (const auto& p : data.pairs) {
      const int predicted = score[p.first] > score[p.second] ? 1 : 0;
      correct += predicted == p.label;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

EarlyStoppingResult train_with_early_stopping(ArousalNet<double>& net, const TrainingData& train,
                                              const TrainingData& validation, const ExperimentConfig& cfg,
                                              std::uint64_t seed) {
  const Mode mode = net.config().mode;
  if (train.size(mode) == 0) throw DataError("training: no training examples");
  if (validation.size(mode) == 0) throw DataError("training: no validation examples");
  cfg.validate();
  nn::Optimizer<double> opt(net.parameters(), cfg.optimizer);
  std::mt19937_64 rng(seed);
  std::vector<UnorderedPair> pairs;
  if (mode == Mode::ranker) pairs = collapse_pairs(train.pairs);
  std::vector<std::vector<double>> best;
  return run_early_stopping(
      cfg.optimizer.max_epochs, cfg.patience,
      [&] {
        if (mode == Mode::classifier)
          train_classifier_epoch(net, opt, train, cfg.optimizer.batch_size, rng);
        else
          train_ranker_epoch(net, opt, train, pairs, cfg.optimizer.batch_size, rng);
      },
      [&] { return evaluate_accuracy(net, validation); }, [&] { best = snapshot_values(net); },
      [&] { restore_values(net, best); });
}

double baseline_accuracy(std::span<const int> train_labels, std::span<const int> test_labels, Mode mode) {
  if (mode == Mode::ranker) return 0.5;
  if (train_labels.empty()) throw DataError("baseline_accuracy: no training labels");
  if (test_labels.empty()) throw DataError("baseline_accuracy: no test labels");
  const auto ones = std::count(train_labels.begin(), train_labels.end(), 1);
  const auto zeros = static_cast<std::ptrdiff_t>(train_labels.size()) - ones;
  const int majority = ones > zeros ? 1 : 0;
  const auto hits = std::count(test_labels.begin(), test_labels.end(), majority);
  return static_cast<double>(hits) / static_cast<double>(test_labels.size());
}

namespace {

std::int64_t tied_pairs(std::span<const double> sorted) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

// Merge sort counting strict inversions.
std::int64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

std::optional<double> kendall_tau(std::span<const double> truth, std::span<const double> predicted) {
  if (truth.size() != predicted.size()) throw DataError("kendall_tau: length mismatch");
  const std::size_t n = truth.size();
  if (n < 2) return std::nullopt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return truth[a] != truth[b] ? truth[a] < truth[b] : predicted[a] < predicted[b];
  });
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = truth[order[k]];
    y[k] = predicted[order[k]];
  }
  const auto total = static_cast<std::int64_t>(n * (n - 1) / 2);
  const std::int64_t ties_x = tied_pairs(x);
  std::int64_t ties_xy = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[j] == x[i] && y[j] == y[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    ties_xy += t * (t - 1) / 2;
    i = j;
  }
  std::vector<double> buf(n);
  const std::int64_t swaps = sort_count_swaps(y, buf, 0, n);
  const std::int64_t ties_y = tied_pairs(y);
  if (ties_x == total || ties_y == total) return std::nullopt;
  const std::int64_t numerator = total - ties_x - ties_y + ties_xy - 2 * swaps;
  const double denom = std::sqrt(static_cast<double>(total - ties_x) * static_cast<double>(total - ties_y));
  return std::clamp(static_cast<double>(numerator) / denom, -1.0, 1.0);
}

std::pair<double, double> mean_with_ci(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, 1.96 * sd / std::sqrt(n)};
}

Summary summarize(std::span<const FoldResult> folds) {
  Summary s;
  s.folds = static_cast<Index>(folds.size());
  std::vector<double> acc, base, tau;
  for (const auto& f : folds) {
    if (f.failed) {
      ++s.failed_folds;
      continue;
    }
    acc.push_back(f.accuracy);
    base.push_back(f.baseline);
    if (f.kendall_tau) tau.push_back(*f.kendall_tau);
  }
  std::tie(s.mean_accuracy, s.accuracy_ci) = mean_with_ci(acc);
  s.mean_baseline = mean_with_ci(base).first;
  if (!tau.empty()) {
    const auto [m, ci] = mean_with_ci(tau);
    s.mean_tau = m;
    s.tau_ci = ci;
  }
  return s;
}

json to_json(const ExperimentReport& report) {
  json folds = json::array();
  for (const auto& f : report.folds) {
    json j{{"test_session", f.test_session},
           {"failed", f.failed},
           {"accuracy", f.accuracy},
           {"baseline", f.baseline},
           {"kendall_tau", f.kendall_tau ? json(*f.kendall_tau) : json(nullptr)},
           {"tau_defined", f.kendall_tau.has_value()},
           {"epochs_trained", f.epochs_trained},
           {"best_epoch", f.best_epoch},
           {"validation_accuracy", f.validation_accuracy},
           {"train_examples", f.train_examples},
           {"validation_examples", f.validation_examples},
           {"test_examples", f.test_examples},
           {"leakage_free", f.leakage_free}};
    if (f.failed) j["error"] = f.error;
    folds.push_back(std::move(j));
  }
  const auto& s = report.summary;
  json sizes = json::array();
  for (const auto& [t, n] : report.dataset_sizes) sizes.push_back({{"threshold", t}, {"examples", n}});
  return json{{"config", to_json(report.config)},
              {"folds", std::move(folds)},
              {"summary",
               {{"folds", s.folds},
                {"failed_folds", s.failed_folds},
                {"mean_accuracy", s.mean_accuracy},
                {"accuracy_ci95", s.accuracy_ci},
                {"mean_baseline", s.mean_baseline},
                {"mean_tau", s.mean_tau ? json(*s.mean_tau) : json(nullptr)},
                {"tau_ci95", s.tau_ci},
                {"dataset_sizes", std::move(sizes)}}}};
}

std::vector<std::pair<double, Index>> dataset_sizes(std::span<const std::vector<Segment>> segments, Mode mode,
                                                    std::span<const double> thresholds) {
  std::vector<std::pair<double, Index>> out;
  for (const double t : thresholds) {
    Index n = 0;
    for (const auto& segs : segments)
      n += static_cast<Index>(mode == Mode::classifier ? label_segments(segs, t).size() : make_pairs(segs, t).size());
    out.emplace_back(t, n);
  }
  return out;
}

SegmentedDataset segment_dataset(std::span<const PreparedSession> dataset, double window_s) {
  if (dataset.empty()) throw DataError("empty dataset");
  SegmentedDataset out;
  out.resolution = dataset.front().frames->resolution();
  out.fps = dataset.front().fps;
  for (const auto& s : dataset) {
    const Resolution r = s.frames->resolution();
    if (r.height != out.resolution.height || r.width != out.resolution.width)
      throw DataError("sessions differ in resolution");
    if (s.fps != out.fps) throw DataError("sessions differ in frame rate");
    out.ids.push_back(s.id);
    out.segments.push_back(segment_session(s, window_s));
  }
  return out;
}

FoldResult run_fold(const SegmentedDataset& data, const Split& split, std::size_t fold, const ExperimentConfig& cfg,
                    std::unique_ptr<ArousalNet<double>>* trained) {
  FoldResult r;
  r.test_session = split.test;
  try {
    auto collect = [&](const std::vector<std::string>& ids) {
      std::vector<const std::vector<Segment>*> out;
      for (const auto& id : ids) {
        const auto it = std::find(data.ids.begin(), data.ids.end(), id);
        if (it == data.ids.end()) throw DataError("unknown session '" + id + "' in split");
        out.push_back(&data.segments[static_cast<std::size_t>(it - data.ids.begin())]);
      }
      return out;
    };
    const auto train_sessions = collect(split.train);
    const auto val_sessions = collect(split.validation);
    const auto test_sessions = collect({split.test});
    const TrainingData train = build_training_data(train_sessions, cfg);
    const TrainingData val = build_training_data(val_sessions, cfg);
    const TrainingData test = build_training_data(test_sessions, cfg);
    r.train_examples = train.size(cfg.mode);
    r.validation_examples = val.size(cfg.mode);
    r.test_examples = test.size(cfg.mode);

    for (const auto* data : {&train, &val})
      for (const auto* seg : data->segments)
        if (seg->session_id == split.test) r.leakage_free = false;
    if (!r.leakage_free) throw DataError("leakage audit failed: test session found in train or validation data");
    if (r.test_examples == 0) throw DataError("test session yields no examples");

    const std::uint64_t fold_seed = cfg.seed + static_cast<std::uint64_t>(fold);
    const NetConfig net_cfg =
        NetConfig::for_window(cfg.window_s, data.fps, data.resolution, cfg.modality, cfg.mode, fold_seed);
    auto owned = std::make_unique<ArousalNet<double>>(net_cfg);
    ArousalNet<double>& net = *owned;
    const auto es = train_with_early_stopping(net, train, val, cfg, fold_seed ^ 0x9e3779b97f4a7c15ULL);
    r.epochs_trained = es.epochs_trained;
    r.best_epoch = es.best_epoch;
    r.validation_accuracy = es.best_score;
    r.accuracy = evaluate_accuracy(net, test);
    r.baseline = baseline_accuracy(train.labels, test.labels, cfg.mode);

    const auto& test_segs = *test_sessions.front();
    std::vector<const Segment*> all;
    std::vector<double> truth;
    for (const auto& seg : test_segs) {
      all.push_back(&seg);
      truth.push_back(seg.mean_arousal);
    }
    r.kendall_tau = kendall_tau(truth, score_segments(net, all));
    if (trained) *trained = std::move(owned);
  } catch (const Error& e) {
    r.failed = true;
    r.error = e.what();
  }
  return r;
}

ExperimentReport run_experiment(std::span<const PreparedSession> dataset, const ExperimentConfig& cfg,
                                const RunOptions& options) {
  cfg.validate();
  const SegmentedDataset data = segment_dataset(dataset, cfg.window_s);
  const auto splits = lovo_splits(data.ids, cfg.validation_sessions, cfg.seed);

  ExperimentReport report;
  report.config = cfg;
  report.folds.resize(splits.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < splits.size(); k = next++) {
      report.folds[k] = run_fold(data, splits[k], k, cfg);
      if (options.log) {
        const auto& f = report.folds[k];
        std::ostringstream line;
        line << "fold " << (k + 1) << "/" << splits.size() << " test=" << f.test_session;
        if (f.failed)
          line << " FAILED: " << f.error;
        else
          line << std::fixed << std::setprecision(4) << " acc=" << f.accuracy << " baseline=" << f.baseline
               << " epochs=" << f.epochs_trained;
        std::lock_guard lock(log_mutex);
        options.log(line.str());
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, cfg.jobs));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < std::min(jobs, splits.size()); ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  report.summary = summarize(report.folds);

  std::vector<double> thresholds;
  for (const auto& v : default_sweep_values(cfg.mode == Mode::classifier ? SweepAxis::epsilon : SweepAxis::delta))
    thresholds.push_back(std::stod(v));
  if (std::find(thresholds.begin(), thresholds.end(), cfg.threshold()) == thresholds.end())
    thresholds.push_back(cfg.threshold());
  std::sort(thresholds.begin(), thresholds.end());
  report.dataset_sizes = dataset_sizes(data.segments, cfg.mode, thresholds);
  return report;
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "epsilon") return SweepAxis::epsilon;
  if (s == "delta") return SweepAxis::delta;
  if (s == "window") return SweepAxis::window;
  if (s == "modality") return SweepAxis::modality;
  throw DataError("unknown sweep axis '" + s + "' (expected epsilon, delta, window or modality)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::epsilon: return "epsilon";
    case SweepAxis::delta: return "delta";
    case SweepAxis::window: return "window";
    case SweepAxis::modality: return "modality";
  }
  return "";
}

std::vector<std::string> default_sweep_values(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::epsilon: return {"0", "0.05", "0.1", "0.2"};
    case SweepAxis::delta: return {"0", "0.2", "0.4", "0.6", "0.75"};
    case SweepAxis::window: return {"0.25", "0.5", "1", "2", "3"};
    case SweepAxis::modality: return {"visual", "audio", "both"};
  }
  return {};
}

ExperimentConfig apply_sweep_value(ExperimentConfig cfg, SweepAxis axis, const std::string& value) {
  if (axis == SweepAxis::modality) {
    cfg.modality = parse_modality(value);
    return cfg;
  }
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
  } catch (const std::exception&) {
    throw DataError("sweep value '" + value + "' is not a number");
  }
  switch (axis) {
    case SweepAxis::epsilon: cfg.epsilon = v; break;
    case SweepAxis::delta: cfg.delta = v; break;
    case SweepAxis::window: cfg.window_s = v; break;
    case SweepAxis::modality: break;
  }
  cfg.validate();
  return cfg;
}

std::vector<ExperimentReport> sweep(std::span<const PreparedSession> dataset, const ExperimentConfig& base,
                                    SweepAxis axis, const std::vector<std::string>& values,
                                    const RunOptions& options) {
  if (values.empty()) throw DataError("sweep: no values");
  std::vector<ExperimentReport> out;
  for (const auto& v : values) {
    if (options.log) options.log(to_string(axis) + "=" + v);
    out.push_back(run_experiment(dataset, apply_sweep_value(base, axis, v), options));
  }
  return out;
}

std::string curve_csv(SweepAxis axis, std::span<const ExperimentReport> reports) {
  std::ostringstream os;
  os << "value,mean_acc,ci,baseline,mean_tau\n";
  os << std::setprecision(17);
  for (const auto& r : reports) {
    const auto& c = r.config;
    switch (axis) {
      case SweepAxis::epsilon: os << c.epsilon; break;
      case SweepAxis::delta: os << c.delta; break;
      case SweepAxis::window: os << c.window_s; break;
      case SweepAxis::modality: os << to_string(c.modality); break;
    }
    os << ',' << r.summary.mean_accuracy << ',' << r.summary.accuracy_ci << ',' << r.summary.mean_baseline << ',';
    if (r.summary.mean_tau) os << *r.summary.mean_tau;
    os << '\n';
  }
  return os.str();
}

CleanedDataset clean_dataset(std::vector<RawSession> sessions, double min_duration_s,
                             std::optional<double> dtw_threshold) {
  CleanedDataset out;
  std::vector<RawSession> kept;
  for (auto& s : sessions) {
    CleaningVerdict v;
    v.id = s.id;
    v.duration_s = s.duration();
    if (v.duration_s < min_duration_s) {
      v.retained = false;
      v.reason = "short";
    } else {
      kept.push_back(std::move(s));
    }
    out.verdicts.push_back(std::move(v));
  }
  if (kept.empty()) return out;

  std::vector<ArousalTrace> traces;
  for (const auto& s : kept) traces.push_back(make_arousal_trace(s));
  const auto outliers = filter_outliers(traces, dtw_threshold.value_or(std::numeric_limits<double>::infinity()),
                                        kept.front().fps);
  std::size_t k = 0;
  for (auto& v : out.verdicts) {
    if (!v.retained) continue;
    v.dtw_distance = outliers[k].distance;
    if (!outliers[k].retained) {
      v.retained = false;
      v.reason = "outlier";
    } else {
      out.sessions.push_back(prepare_session(std::move(kept[k])));
    }
    ++k;
  }
  return out;
}

}  // namespace arousal
