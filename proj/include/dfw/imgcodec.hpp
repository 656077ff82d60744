#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dfw/common.hpp"

// Byteplot conversion: raw file bytes -> grayscale image -> normalized input
// vector for the detection engine.

namespace dfw::imgcodec {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, one byte per pixel

  std::size_t size() const { return pixels.size(); }
  std::uint8_t at(int y, int x) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

// Byteplot width by file size (MALIMG convention).
int byteplot_width(std::size_t n_bytes);

// One byte per pixel in reading order; width from byteplot_width, final row
// zero-padded. Throws EmptyInput.
GrayImage bytes_to_image(std::span<const std::uint8_t> data);

// Area-averaging box filter with fractional pixel overlap; result rounded
// half-up. Identity when the target equals the source size.
GrayImage downscale(const GrayImage& img, int target_w, int target_h);

// pixels / 255 row-major. Throws ShapeMismatch unless the image is exactly
// expected_w x expected_h.
Eigen::VectorXd to_input_vector(const GrayImage& img, int expected_w,
                                int expected_h);

// Binary PGM (P5), 8-bit.
void write_pgm(const GrayImage& img, const std::string& path);
GrayImage read_pgm(const std::string& path);

}  // namespace dfw::imgcodec
