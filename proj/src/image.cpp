#include "pantry/image.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>

#include "pantry/rng.hpp"

namespace pantry::img {

namespace {

// PNM header token reader: skips whitespace and '#' comments.
int read_pnm_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    } else {
      c = in.get();
    }
  }
  if (c == EOF || !std::isdigit(c)) throw IoError("malformed PNM header in " + path);
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

std::uint8_t rescale(std::uint8_t raw, int maxval) {
  if (maxval == 255) return raw;
  const int scaled = (static_cast<int>(raw) * 255 + maxval / 2) / maxval;
  return static_cast<std::uint8_t>(std::min(scaled, 255));
}

}  // namespace

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path);

  std::array<char, 2> magic{};
  in.read(magic.data(), 2);
  if (!in) throw IoError("cannot read image header: " + path);
  const bool rgb = magic[0] == 'P' && magic[1] == '6';
  const bool gray = magic[0] == 'P' && magic[1] == '5';
  if (!rgb && !gray) {
    throw IoError("unsupported image format (binary PPM/PGM expected): " + path);
  }

  const int width = read_pnm_int(in, path);
  const int height = read_pnm_int(in, path);
  const int maxval = read_pnm_int(in, path);
  if (width <= 0 || height <= 0) throw IoError("bad image dimensions in " + path);
  if (maxval <= 0 || maxval > 255) {
    throw IoError("unsupported maxval " + std::to_string(maxval) + " in " + path);
  }
  // The header ends with exactly one whitespace byte before the raster.

  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<std::uint8_t> raw(n * (rgb ? 3 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw IoError("truncated image data in " + path);
  }

  Image image = Image::blank(height, width);
  if (rgb) {
    for (std::size_t i = 0; i < n * 3; ++i) image.pixels[i] = rescale(raw[i], maxval);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint8_t v = rescale(raw[i], maxval);
      image.pixels[i * 3 + 0] = v;
      image.pixels[i * 3 + 1] = v;
      image.pixels[i * 3 + 2] = v;
    }
  }
  return image;
}

void save_ppm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open image for writing: " + path);
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("short write to " + path);
}

namespace {

/// Bilinear fetch at a source coordinate already clamped into the image.
std::uint8_t sample_bilinear(const Image& im, double sx, double sy, int c) {
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double dx = sx - x0;
  const double dy = sy - y0;
  if (dx == 0.0 && dy == 0.0) return im.at(y0, x0, c);
  const int x1 = std::min(x0 + 1, im.width - 1);
  const int y1 = std::min(y0 + 1, im.height - 1);
  const double v = (1.0 - dy) * ((1.0 - dx) * im.at(y0, x0, c) + dx * im.at(y0, x1, c)) +
                   dy * ((1.0 - dx) * im.at(y1, x0, c) + dx * im.at(y1, x1, c));
  return static_cast<std::uint8_t>(std::lround(std::min(std::max(v, 0.0), 255.0)));
}

struct Affine {
  // | a b tx |
  // | c d ty |
  double a = 1, b = 0, tx = 0;
  double c = 0, d = 1, ty = 0;

  static Affine identity() { return {}; }
  static Affine translation(double x, double y) { return {1, 0, x, 0, 1, y}; }

  Affine mul(const Affine& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, a * o.tx + b * o.ty + tx,
            c * o.a + d * o.c, c * o.b + d * o.d, c * o.tx + d * o.ty + ty};
  }

  Affine inverse() const {
    const double det = a * d - b * c;
    const double ia = d / det, ib = -b / det, ic = -c / det, id = a / det;
    return {ia, ib, -(ia * tx + ib * ty), ic, id, -(ic * tx + id * ty)};
  }
};

}  // namespace

Image hflip(const Image& image) {
  Image out = Image::blank(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, image.width - 1 - x, c);
    }
  }
  return out;
}

Image augment(const Image& image, const AugmentParams& params) {
  const Image* src = &image;
  Image flipped;
  if (params.hflip) {
    flipped = hflip(image);
    src = &flipped;
  }

  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double theta = params.rotation_deg * kDegToRad;
  const double shear = params.shear_deg * kDegToRad;
  const double cx = (image.width - 1) / 2.0;
  const double cy = (image.height - 1) / 2.0;

  const Affine rot{std::cos(theta), -std::sin(theta), 0, std::sin(theta), std::cos(theta), 0};
  const Affine shr{1, -std::sin(shear), 0, 0, std::cos(shear), 0};
  const Affine zoom{params.zoom, 0, 0, 0, params.zoom, 0};
  const Affine shift = Affine::translation(params.shift_frac_x * image.width,
                                           params.shift_frac_y * image.height);

  // Forward map: shift o (rotate o shear o zoom about the center).
  const Affine about_center = Affine::translation(cx, cy)
                                  .mul(rot)
                                  .mul(shr)
                                  .mul(zoom)
                                  .mul(Affine::translation(-cx, -cy));
  const Affine inverse = shift.mul(about_center).inverse();

  Image out = Image::blank(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      double sx = inverse.a * x + inverse.b * y + inverse.tx;
      double sy = inverse.c * x + inverse.d * y + inverse.ty;
      // Nearest-edge fill for out-of-bounds sources.
      sx = std::min(std::max(sx, 0.0), static_cast<double>(image.width - 1));
      sy = std::min(std::max(sy, 0.0), static_cast<double>(image.height - 1));
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = sample_bilinear(*src, sx, sy, c);
    }
  }
  return out;
}

AugmentParams sample_params(std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::keyed(seed, index);
  AugmentParams p;
  p.rotation_deg = rng.uniform(-45.0, 45.0);
  p.shift_frac_x = rng.uniform(-0.2, 0.2);
  p.shift_frac_y = rng.uniform(-0.2, 0.2);
  p.zoom = rng.uniform(0.8, 1.2);
  p.shear_deg = rng.uniform(-20.0, 20.0);
  p.hflip = rng.coin();
  return p;
}

Image resize_bilinear(const Image& image, int out_h, int out_w) {
  if (out_h <= 0 || out_w <= 0) throw ArgumentError("resize_bilinear: target must be positive");
  Image out = Image::blank(out_h, out_w);
  const double sy_scale = static_cast<double>(image.height) / out_h;
  const double sx_scale = static_cast<double>(image.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double sy = (y + 0.5) * sy_scale - 0.5;
    sy = std::min(std::max(sy, 0.0), static_cast<double>(image.height - 1));
    for (int x = 0; x < out_w; ++x) {
      double sx = (x + 0.5) * sx_scale - 0.5;
      sx = std::min(std::max(sx, 0.0), static_cast<double>(image.width - 1));
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = sample_bilinear(image, sx, sy, c);
    }
  }
  return out;
}

Tensor to_input_tensor(const Image& image) {
  auto out = Tensor::zeros({1, 3, image.height, image.width});
  const std::size_t plane = static_cast<std::size_t>(image.height) * image.width;
  float* data = out.data();
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * image.width + x;
      for (int c = 0; c < 3; ++c) {
        data[static_cast<std::size_t>(c) * plane + i] = image.at(y, x, c) / 255.0f;
      }
    }
  }
  return out;
}

}  // namespace pantry::img
