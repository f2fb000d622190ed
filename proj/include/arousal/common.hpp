#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace arousal {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be read, or its content is malformed. `path()` names it.
class LoadError : public Error {
 public:
  LoadError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Input data violates an operation's precondition.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Tensor or layer shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not available for this configuration.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

enum class Modality { visual, audio, both };
enum class Mode { classifier, ranker };

inline bool uses_visual(Modality m) { return m != Modality::audio; }
inline bool uses_audio(Modality m) { return m != Modality::visual; }

std::string to_string(Modality m);
std::string to_string(Mode m);
Modality parse_modality(const std::string& s);
Mode parse_mode(const std::string& s);

}  // namespace arousal
