#pragma once

#include <optional>

#include "tinylic/image.hpp"

namespace tinylic {

// Mean squared error over all RGB samples, in the 0..255 domain.
double mse(const ImageBuffer& a, const ImageBuffer& b);

// 10 log10(255^2 / MSE) over RGB-pooled samples; +infinity for equal images.
// Throws ShapeError on dims mismatch.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

// Five-scale MS-SSIM (11x11 Gaussian window, sigma 1.5), averaged over the
// RGB channels. Throws MinSizeError when either side is below 176 pixels.
double ms_ssim(const ImageBuffer& a, const ImageBuffer& b);

inline constexpr int kMsSsimMinSide = 176;

struct RdReport {
  double bpp = 0.0;
  double psnr = 0.0;
  double mse_unit = 0.0;  // MSE with samples scaled to [0, 1]
  std::optional<double> ms_ssim;
};

RdReport rd_report(const ImageBuffer& reference, const ImageBuffer& test, double bpp);

// J = bpp + lambda * MSE in the normalised [0, 1] domain.
double j_cost(const RdReport& report, double lambda);

}  // namespace tinylic
