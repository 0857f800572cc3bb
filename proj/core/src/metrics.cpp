#include "tinylic/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tinylic/error.hpp"

namespace tinylic {

namespace {

void require_same_dims(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError("image dims differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                     std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

struct Plane {
  int w = 0;
  int h = 0;
  std::vector<double> v;
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

Plane channel_plane(const ImageBuffer& img, int c) {
  Plane p{img.width, img.height, std::vector<double>(static_cast<std::size_t>(img.width) * img.height)};
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) p.at(x, y) = img.at(x, y, c);
  return p;
}

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += g[i];
  }
  for (double& t : g) t /= total;
  return g;
}

// Separable "valid" filtering.
Plane filter_valid(const Plane& in) {
  static const auto taps = gaussian_taps();
  Plane tmp{in.w - kWindow + 1, in.h, {}};
  tmp.v.resize(static_cast<std::size_t>(tmp.w) * tmp.h);
  for (int y = 0; y < in.h; ++y)
    for (int x = 0; x < tmp.w; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += taps[k] * in.at(x + k, y);
      tmp.at(x, y) = s;
    }
  Plane out{tmp.w, in.h - kWindow + 1, {}};
  out.v.resize(static_cast<std::size_t>(out.w) * out.h);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += taps[k] * tmp.at(x, y + k);
      out.at(x, y) = s;
    }
  return out;
}

Plane product(const Plane& a, const Plane& b) {
  Plane out{a.w, a.h, std::vector<double>(a.v.size())};
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * b.v[i];
  return out;
}

Plane downsample(const Plane& in) {
  Plane out{in.w / 2, in.h / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.w) * out.h);
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x)
      out.at(x, y) = 0.25 * (in.at(2 * x, 2 * y) + in.at(2 * x + 1, 2 * y) + in.at(2 * x, 2 * y + 1) +
                             in.at(2 * x + 1, 2 * y + 1));
  return out;
}

struct SsimTerms {
  double ssim;
  double cs;
};

SsimTerms ssim_terms(const Plane& a, const Plane& b) {
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  const Plane mu_a = filter_valid(a);
  const Plane mu_b = filter_valid(b);
  const Plane aa = filter_valid(product(a, a));
  const Plane bb = filter_valid(product(b, b));
  const Plane ab = filter_valid(product(a, b));
  double ssim_sum = 0.0;
  double cs_sum = 0.0;
  for (std::size_t i = 0; i < mu_a.v.size(); ++i) {
    const double ma = mu_a.v[i];
    const double mb = mu_b.v[i];
    const double va = aa.v[i] - ma * ma;
    const double vb = bb.v[i] - mb * mb;
    const double cov = ab.v[i] - ma * mb;
    const double cs = (2.0 * cov + c2) / (va + vb + c2);
    cs_sum += cs;
    ssim_sum += cs * (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
  }
  const double n = static_cast<double>(mu_a.v.size());
  return {ssim_sum / n, cs_sum / n};
}

}  // namespace

double mse(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_dims(a, b);
  double total = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
    total += d * d;
  }
  return total / static_cast<double>(a.rgb.size());
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

double ms_ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_dims(a, b);
  if (a.width < kMsSsimMinSide || a.height < kMsSsimMinSide) {
    throw MinSizeError("MS-SSIM needs images of at least " + std::to_string(kMsSsimMinSide) + "x" +
                       std::to_string(kMsSsimMinSide));
  }
  static constexpr std::array<double, 5> kWeights{0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    Plane pa = channel_plane(a, c);
    Plane pb = channel_plane(b, c);
    double value = 1.0;
    for (std::size_t scale = 0; scale < kWeights.size(); ++scale) {
      const SsimTerms t = ssim_terms(pa, pb);
      const bool last = scale + 1 == kWeights.size();
      value *= std::pow(std::max(last ? t.ssim : t.cs, 0.0), kWeights[scale]);
      if (!last) {
        pa = downsample(pa);
        pb = downsample(pb);
      }
    }
    sum += value;
  }
  return sum / 3.0;
}

RdReport rd_report(const ImageBuffer& reference, const ImageBuffer& test, double bpp) {
  RdReport r;
  r.bpp = bpp;
  r.psnr = psnr(reference, test);
  r.mse_unit = mse(reference, test) / (255.0 * 255.0);
  if (reference.width >= kMsSsimMinSide && reference.height >= kMsSsimMinSide) r.ms_ssim = ms_ssim(reference, test);
  return r;
}

double j_cost(const RdReport& report, double lambda) { return report.bpp + lambda * report.mse_unit; }

}  // namespace tinylic
