#include "tinylic/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "tinylic/bitstream.hpp"
#include "tinylic/error.hpp"
#include "tinylic/weights.hpp"

namespace tinylic {

namespace {

class PpmCursor {
 public:
  explicit PpmCursor(std::span<const std::uint8_t> b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) throw FormatError("PPM: expected a number");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1 << 24)) throw FormatError("PPM: header value too large");
    }
    return static_cast<int>(v);
  }

  std::size_t pos_ = 0;
  std::span<const std::uint8_t> bytes_;
};

}  // namespace

ImageBuffer::ImageBuffer(int w, int h) : width(w), height(h) {
  if (w < 1 || h < 1) throw ShapeError("image dims must be >= 1");
  rgb.assign(static_cast<std::size_t>(w) * h * 3, 0);
}

ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw FormatError("not a binary PPM (P6) file");
  PpmCursor cur(bytes);
  cur.pos_ = 2;
  const int width = cur.number();
  const int height = cur.number();
  const int maxval = cur.number();
  if (width < 1 || height < 1) throw FormatError("PPM: empty image");
  if (maxval != 255) throw FormatError("PPM: only maxval 255 is supported");
  if (cur.pos_ >= bytes.size() || !std::isspace(bytes[cur.pos_])) throw FormatError("PPM: malformed header");
  ++cur.pos_;
  ImageBuffer img(width, height);
  if (bytes.size() - cur.pos_ < img.rgb.size()) throw FormatError("PPM: pixel data truncated");
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(cur.pos_), img.rgb.size(), img.rgb.begin());
  return img;
}

std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image) {
  const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.rgb.begin(), image.rgb.end());
  return out;
}

ImageBuffer read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file_bytes(path)); }

void write_ppm(const std::filesystem::path& path, const ImageBuffer& image) {
  write_file_bytes(path, encode_ppm(image));
}

Tensor image_to_tensor(const ImageBuffer& image) {
  Tensor x(3, image.height, image.width);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < image.height; ++y)
      for (int px = 0; px < image.width; ++px) x(c, y, px) = static_cast<float>(image.at(px, y, c)) / 255.0f;
  return x;
}

ImageBuffer tensor_to_image(const Tensor& x) {
  if (x.channels() != 3) throw ShapeError("tensor_to_image: expected 3 channels");
  ImageBuffer img(x.width(), x.height());
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < x.height(); ++y)
      for (int px = 0; px < x.width(); ++px) {
        const float v = std::clamp(x(c, y, px), 0.0f, 1.0f);
        img.at(px, y, c) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  return img;
}

Tensor pad_replicate(const Tensor& x, int height, int width) {
  if (height < x.height() || width < x.width()) throw ShapeError("pad_replicate: target smaller than input");
  Tensor out(x.channels(), height, width);
  for (int c = 0; c < x.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int px = 0; px < width; ++px)
        out(c, y, px) = x(c, std::min(y, x.height() - 1), std::min(px, x.width() - 1));
  return out;
}

Tensor crop(const Tensor& x, int height, int width) {
  if (height > x.height() || width > x.width() || height < 1 || width < 1) throw ShapeError("crop: bad target dims");
  Tensor out(x.channels(), height, width);
  for (int c = 0; c < x.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int px = 0; px < width; ++px) out(c, y, px) = x(c, y, px);
  return out;
}

int round_up(int value, int multiple) { return (value + multiple - 1) / multiple * multiple; }

ImageBuffer synthetic_image(int width, int height, std::uint64_t seed) {
  SplitMix64 rng(seed);
  ImageBuffer img(width, height);
  const double fx = 0.02 + 0.2 * rng.uniform();
  const double fy = 0.02 + 0.2 * rng.uniform();
  const double phase = 6.283185307179586 * rng.uniform();
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double wave = std::sin(fx * x + fy * y * (c + 1) + phase);
        const double v = 128.0 + 80.0 * wave + 24.0 * (rng.uniform() - 0.5);
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
  return img;
}

std::uint64_t image_hash(const ImageBuffer& image) {
  const std::string dims = std::to_string(image.width) + "x" + std::to_string(image.height);
  return fnv1a64(image.rgb, fnv1a64(dims));
}

}  // namespace tinylic
