#include "dfw/imgcodec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace dfw::imgcodec {

int byteplot_width(std::size_t n) {
  const std::size_t kb = 1024;
  if (n < 10 * kb) return 32;
  if (n < 30 * kb) return 64;
  if (n < 60 * kb) return 128;
  if (n < 100 * kb) return 256;
  if (n < 200 * kb) return 384;
  if (n < 500 * kb) return 512;
  if (n < 1000 * kb) return 768;
  return 1024;
}

GrayImage bytes_to_image(std::span<const std::uint8_t> data) {
  if (data.empty()) throw EmptyInput("bytes_to_image: empty input");
  const int width = byteplot_width(data.size());
  const int height = static_cast<int>((data.size() + width - 1) / width);
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, 0);
  std::copy(data.begin(), data.end(), img.pixels.begin());
  return img;
}

GrayImage downscale(const GrayImage& img, int target_w, int target_h) {
  if (target_w < 1 || target_h < 1)
    throw Error("downscale: target dimensions must be >= 1");
  if (img.width < 1 || img.height < 1 ||
      img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
    throw Error("downscale: malformed source image");

  GrayImage out;
  out.width = target_w;
  out.height = target_h;
  out.pixels.resize(static_cast<std::size_t>(target_w) * target_h);

  const double sx = static_cast<double>(img.width) / target_w;
  const double sy = static_cast<double>(img.height) / target_h;

  for (int ty = 0; ty < target_h; ++ty) {
    const double y0 = ty * sy;
    const double y1 = (ty + 1) * sy;
    for (int tx = 0; tx < target_w; ++tx) {
      const double x0 = tx * sx;
      const double x1 = (tx + 1) * sx;
      double acc = 0.0;
      for (int r = static_cast<int>(std::floor(y0)); r < img.height && r < y1; ++r) {
        const double wy = std::min<double>(y1, r + 1) - std::max<double>(y0, r);
        if (wy <= 0.0) continue;
        for (int c = static_cast<int>(std::floor(x0)); c < img.width && c < x1; ++c) {
          const double wx = std::min<double>(x1, c + 1) - std::max<double>(x0, c);
          if (wx <= 0.0) continue;
          acc += wy * wx * img.at(r, c);
        }
      }
      const double avg = acc / ((y1 - y0) * (x1 - x0));
      const double rounded = std::floor(avg + 0.5);  // half-up
      out.pixels[static_cast<std::size_t>(ty) * target_w + tx] =
          static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
    }
  }
  return out;
}

Eigen::VectorXd to_input_vector(const GrayImage& img, int expected_w,
                                int expected_h) {
  if (img.width != expected_w || img.height != expected_h)
    throw ShapeMismatch("to_input_vector: image is " + std::to_string(img.width) +
                        "x" + std::to_string(img.height) + ", expected " +
                        std::to_string(expected_w) + "x" + std::to_string(expected_h));
  Eigen::VectorXd v(img.pixels.size());
  for (std::size_t i = 0; i < img.pixels.size(); ++i) v[i] = img.pixels[i] / 255.0;
  return v;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("write_pgm: cannot open " + path);
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!f) throw IoFailure("write_pgm: write failed for " + path);
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("read_pgm: cannot open " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw BadMagic("read_pgm: not a binary PGM: " + path);
  auto next_int = [&f, &path]() {
    // skip whitespace and '#' comment lines
    for (;;) {
      int ch = f.peek();
      if (ch == '#') {
        std::string line;
        std::getline(f, line);
      } else if (std::isspace(ch)) {
        f.get();
      } else {
        break;
      }
    }
    long v = -1;
    f >> v;
    if (!f || v < 0) throw ParseError("read_pgm: bad header in " + path);
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (maxval != 255) throw ParseError("read_pgm: only maxval 255 supported");
  f.get();  // single whitespace after maxval
  GrayImage img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(h);
  img.pixels.resize(static_cast<std::size_t>(w) * h);
  f.read(reinterpret_cast<char*>(img.pixels.data()),
         static_cast<std::streamsize>(img.pixels.size()));
  if (f.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw ParseError("read_pgm: truncated pixel data in " + path);
  return img;
}

}  // namespace dfw::imgcodec
