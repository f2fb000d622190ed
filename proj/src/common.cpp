#include "arousal/common.hpp"

namespace arousal {

std::string to_string(Modality m) {
  switch (m) {
    case Modality::visual: return "visual";
    case Modality::audio: return "audio";
    case Modality::both: return "both";
  }
  return "both";
}

std::string to_string(Mode m) { return m == Mode::classifier ? "classify" : "rank"; }

Modality parse_modality(const std::string& s) {
  if (s == "visual") return Modality::visual;
  if (s == "audio") return Modality::audio;
  if (s == "both") return Modality::both;
  throw DataError("unknown modality '" + s + "'");
}

Mode parse_mode(const std::string& s) {
  if (s == "classify" || s == "classifier") return Mode::classifier;
  if (s == "rank" || s == "ranker") return Mode::ranker;
  throw DataError("unknown mode '" + s + "'");
}

}  // namespace arousal
