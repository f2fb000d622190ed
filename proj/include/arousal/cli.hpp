#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arousal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one command (`synth`, `preprocess`, `train`, `crossval`, `sweep`,
/// `gcam`). Returns 0 on success, 1 on a usage error, 2 on a data error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace arousal::cli
