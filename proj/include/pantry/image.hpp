#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pantry/tensor.hpp"

namespace pantry::img {

/// Decoded raster: 8-bit RGB, interleaved, row-major. Grayscale sources are
/// replicated to three channels at load time.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3

  std::uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  static Image blank(int height, int width) {
    return Image{height, width,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width * 3, 0)};
  }
};

/// Decodes binary PPM (P6) and PGM (P5, replicated to RGB). Other formats
/// raise IoError; PNG/JPEG support would come from an external codec and is
/// deliberately not built in.
Image load_image(const std::string& path);

void save_ppm(const Image& image, const std::string& path);

/// Bilinear resize with pixel-center sampling (no corner alignment).
/// Constant images stay constant; resizing to the same size is exact.
Image resize_bilinear(const Image& image, int out_h = 224, int out_w = 224);

/// One augmentation draw. Ranges: rotation [-45,45] deg, shifts [-0.2,0.2]
/// of the image extent, zoom [0.8,1.2], shear [-20,20] deg, flip with
/// probability 1/2.
struct AugmentParams {
  double rotation_deg = 0.0;
  double shift_frac_x = 0.0;
  double shift_frac_y = 0.0;
  double zoom = 1.0;
  double shear_deg = 0.0;
  bool hflip = false;

  bool is_identity() const {
    return rotation_deg == 0.0 && shift_frac_x == 0.0 && shift_frac_y == 0.0 && zoom == 1.0 &&
           shear_deg == 0.0 && !hflip;
  }
};

/// Deterministic draw for sample `index` under `seed`: an mt19937_64 stream
/// keyed by splitmix64(seed, index) drawing, in order, rotation, shift x,
/// shift y, zoom, shear, flip. Same pair, bit-identical params.
AugmentParams sample_params(std::uint64_t seed, std::uint64_t index);

/// Optional horizontal flip, then one affine transform composed from
/// rotation * shear * zoom * shift about the image center, applied by
/// inverse mapping with bilinear sampling and nearest-edge fill. Output
/// dimensions equal input dimensions; identity parameters reproduce the
/// input bit-exactly.
Image augment(const Image& image, const AugmentParams& params);

Image hflip(const Image& image);

/// Channel-first float tensor [1,3,H,W], values scaled to [0,1].
Tensor to_input_tensor(const Image& image);

}  // namespace pantry::img
