#pragma once

#include "arousal/common.hpp"

#include <filesystem>

namespace arousal {

using GrayImage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct RgbImage {
  GrayImage r, g, b;
  Index height() const { return r.rows(); }
  Index width() const { return r.cols(); }
};

/// Rec.601 luma, rounded to the nearest integer.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

GrayImage to_gray(const RgbImage& rgb);

/// Bilinear resample with pixel-centre alignment; output rounded to nearest.
GrayImage resize_bilinear(const GrayImage& src, Index height, Index width);

/// Reads a binary PGM (P5) or PPM (P6) with maxval 255. PPM input is
/// converted to gray with `luma`.
GrayImage read_pnm(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);

}  // namespace arousal
