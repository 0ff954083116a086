#include "simi/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

namespace simi {
namespace {

namespace fs = std::filesystem;

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

RawImage read_png(const fs::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(Errc::CorruptData, "malformed PNG " + path.string() + ": " + message);
  }
  // RGBA keeps colour values untouched by compositing; alpha is dropped below.
  png.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, rgba.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(Errc::CorruptData, "malformed PNG " + path.string() + ": " + message);
  }
  RawImage image(static_cast<int>(png.width), static_cast<int>(png.height), 3);
  const std::size_t pixels = static_cast<std::size_t>(image.width) * image.height;
  for (std::size_t i = 0; i < pixels; ++i) {
    std::copy_n(rgba.data() + 4 * i, 3, image.data.data() + 3 * i);
  }
  return image;
}

void write_png(const fs::path& path, const RawImage& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(Errc::UnsupportedFormat, "PNG output needs 1 or 3 channels");
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.data.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw Error(Errc::IoError, "failed writing PNG " + path.string() + ": " + message);
  }
}

// Next whitespace-delimited header token of a PNM file, skipping comments.
std::string pnm_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

int pnm_number(std::istream& in, const fs::path& path) {
  const std::string token = pnm_token(in);
  if (token.empty() || !std::all_of(token.begin(), token.end(), ::isdigit) || token.size() > 9) {
    throw Error(Errc::CorruptData, "bad PPM header in " + path.string());
  }
  return std::stoi(token);
}

RawImage read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  if (pnm_token(in) != "P6") throw Error(Errc::UnsupportedFormat, "only binary P6 PPM is supported");
  const int width = pnm_number(in, path);
  const int height = pnm_number(in, path);
  const int maxval = pnm_number(in, path);
  if (width <= 0 || height <= 0) throw Error(Errc::CorruptData, "empty PPM " + path.string());
  if (maxval != 255) throw Error(Errc::UnsupportedFormat, "PPM maxval must be 255");
  RawImage image(width, height, 3);
  in.read(reinterpret_cast<char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.data.size())) {
    throw Error(Errc::CorruptData, "truncated PPM pixel data in " + path.string());
  }
  return image;
}

void write_ppm(const fs::path& path, const RawImage& image) {
  if (image.channels != 3) throw Error(Errc::UnsupportedFormat, "PPM output needs 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

}  // namespace

RawImage load_image(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(Errc::FileNotFound, path.string());
  std::ifstream probe(path, std::ios::binary);
  std::uint8_t magic[8] = {};
  probe.read(reinterpret_cast<char*>(magic), sizeof magic);
  const auto got = probe.gcount();
  probe.close();
  if (got == 8 && std::equal(magic, magic + 8, kPngSignature)) return read_png(path);
  if (got >= 2 && magic[0] == 'P' && magic[1] == '6') return read_ppm(path);
  throw Error(Errc::UnsupportedFormat, "not a PNG or P6 PPM: " + path.string());
}

void save_image(const fs::path& path, const RawImage& image) {
  if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
    throw Error(Errc::ShapeMismatch, "RawImage data length does not match its dimensions");
  }
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  if (ext == ".ppm") {
    write_ppm(path, image);
  } else {
    write_png(path, image);
  }
}

template <typename T>
Tensor<T> to_unit_tensor(const RawImage& image) {
  if (image.channels != 3) {
    throw Error(Errc::ChannelCountMismatch, "expected 3 channels, got " + std::to_string(image.channels));
  }
  Tensor<T> out(Shape{1, 3, image.height, image.width});
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(0, c, y, x) = static_cast<T>(image.at(x, y, c)) / T(255);
  return out;
}

template <typename T>
std::uint8_t to_intensity(T v) {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

template <typename T>
RawImage from_unit_tensor(const Tensor<T>& tensor) {
  const Shape s = tensor.shape();
  if (s.n != 1 || s.c != 3) {
    throw Error(Errc::ShapeMismatch, "from_unit_tensor expects (1,3,H,W), got " + s.str());
  }
  RawImage image(s.w, s.h, 3);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x)
      for (int c = 0; c < 3; ++c) image.at(x, y, c) = to_intensity(tensor.at(0, c, y, x));
  return image;
}

template <typename T>
RawImage plane_to_gray(const Tensor<T>& tensor, int n, int c) {
  const Shape s = tensor.shape();
  if (n < 0 || n >= s.n || c < 0 || c >= s.c) {
    throw Error(Errc::ShapeMismatch, "plane index out of range for " + s.str());
  }
  RawImage image(s.w, s.h, 1);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x) image.at(x, y, 0) = to_intensity(tensor.at(n, c, y, x));
  return image;
}

template Tensor<float> to_unit_tensor(const RawImage&);
template Tensor<double> to_unit_tensor(const RawImage&);
template RawImage from_unit_tensor(const Tensor<float>&);
template RawImage from_unit_tensor(const Tensor<double>&);
template std::uint8_t to_intensity(float);
template std::uint8_t to_intensity(double);
template RawImage plane_to_gray(const Tensor<float>&, int, int);
template RawImage plane_to_gray(const Tensor<double>&, int, int);

}  // namespace simi
