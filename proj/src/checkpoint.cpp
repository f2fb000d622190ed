#include "arousal/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace arousal {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoints are written on little-endian hosts");

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json to_json(const NetConfig& cfg) {
  return json{{"frames", cfg.frames},
              {"height", cfg.resolution.height},
              {"width", cfg.resolution.width},
              {"mfcc_length", cfg.mfcc_length},
              {"modality", to_string(cfg.modality)},
              {"mode", to_string(cfg.mode)},
              {"seed", cfg.seed}};
}

NetConfig net_config_from_json(const json& j) {
  NetConfig cfg;
  cfg.frames = j.at("frames").get<Index>();
  cfg.resolution = {j.at("height").get<Index>(), j.at("width").get<Index>()};
  cfg.mfcc_length = j.at("mfcc_length").get<Index>();
  cfg.modality = parse_modality(j.at("modality").get<std::string>());
  cfg.mode = parse_mode(j.at("mode").get<std::string>());
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

void save_checkpoint(const fs::path& path, ArousalNet<double>& net, const json& run_config) {
  json layers = json::array();
  for (const auto* p : net.parameters()) layers.push_back({{"name", p->name}, {"shape", p->value.shape()}});
  const json header{{"format", "arousal-checkpoint"},
                    {"version", 1},
                    {"net", to_json(net.config())},
                    {"layers", layers},
                    {"config", run_config},
                    {"config_hash", fnv1a_hex(run_config.dump())}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError(path.string(), "cannot open for writing");
  out << header.dump() << '\n';
  for (const auto* p : net.parameters())
    out.write(reinterpret_cast<const char*>(p->value.data().data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  if (!out) throw LoadError(path.string(), "write failed");
}

LoadedCheckpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open checkpoint");
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string(), "empty checkpoint");
  json header;
  NetConfig cfg;
  try {
    header = json::parse(line);
    if (header.at("format") != "arousal-checkpoint" || header.at("version") != 1)
      throw LoadError(path.string(), "not an arousal checkpoint");
    cfg = net_config_from_json(header.at("net"));
  } catch (const json::exception& e) {
    throw LoadError(path.string(), std::string("malformed checkpoint header: ") + e.what());
  } catch (const DataError& e) {
    throw LoadError(path.string(), std::string("malformed checkpoint header: ") + e.what());
  }
  if (fnv1a_hex(header.at("config").dump()) != header.value("config_hash", ""))
    throw LoadError(path.string(), "config hash mismatch");

  LoadedCheckpoint out{ArousalNet<double>(cfg), header.at("config")};
  const auto params = out.net.parameters();
  const json& layers = header.at("layers");
  if (layers.size() != params.size()) throw LoadError(path.string(), "layer count does not match the network");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (layers[k].at("name") != params[k]->name ||
        layers[k].at("shape").get<std::vector<Index>>() != params[k]->value.shape())
      throw LoadError(path.string(), "layer '" + params[k]->name + "' does not match the network");
    auto& v = params[k]->value.data();
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
      throw LoadError(path.string(), "truncated parameter payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw LoadError(path.string(), "trailing bytes after parameters");
  return out;
}

}  // namespace arousal
