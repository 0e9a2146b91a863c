#pragma once

#include <cstddef>
#include <optional>

#include "pap/types.hpp"

// Unsupervised optic-disc proposal: red channel -> retina mask -> shrunken
// circle crop -> brightest-region mask -> validated component -> enlarged
// bounding box, with the circle crop as the fallback when no component
// survives validation. Fully deterministic; no RNG anywhere.

namespace pap {

struct MorphologyConfig {
  double open_radius_frac = 0.01;         // of image min-dimension
  double close_radius_frac = 0.02;        // of image min-dimension
  double mean_filter_radius_frac = 0.015; // of crop min-dimension
  double box_enlarge = 1.5;               // multiplicative box padding
  double eccentricity_max = 0.95;         // above this = line-like artifact
  double area_min_frac = 0.001;           // admissible component area range,
  double area_max_frac = 0.25;            // as a fraction of the crop area

  void validate() const;
};

struct ComponentInfo {
  BinaryMask mask;  // same dims as the input mask; just the chosen component
  std::size_t area = 0;
  double eccentricity = 0.0;
};

struct DiscProposal {
  FundusImage crop;
  BoundingBox source_box;  // in original-image coordinates
  bool used_fallback = false;
  Circle retina_circle;
  BinaryMask disc_mask;  // selected component in crop coordinates; empty on fallback
  std::size_t component_area = 0;       // 0 on fallback
  double component_eccentricity = 0.0;  // 0 on fallback
};

/// Red plane extracted as a gray image.
GrayImage red_plane(const FundusImage& img);

/// Global 256-bin histogram equalization of the red plane (inclusive-CDF map).
GrayImage equalized_red(const FundusImage& img);

/// Pixels above 20% of the mean intensity, cleaned by opening then closing.
/// Throws when nothing clears the (strict) threshold or cleaning empties it.
BinaryMask retina_mask(const GrayImage& gray, const MorphologyConfig& cfg);

/// Minimum enclosing circle of the true pixels, treating each pixel as a unit
/// square centered on its integer coordinates (hence the +0.5 on the radius).
Circle fit_retina_circle(const BinaryMask& mask);

/// Pixel bounds of the square of half-side shrink*r around the circle center,
/// clamped to the image. Throws if no pixel center falls inside.
BoundingBox circle_crop_box(const FundusImage& img, const Circle& c, double shrink = 0.8);

/// Square crop around the circle center at shrink*r; pixels farther than
/// shrink*r from the center are zeroed in all channels.
FundusImage crop_circle(const FundusImage& img, const Circle& c, double shrink = 0.8);

/// Brightest-region mask of a crop: red plane -> disk mean filter -> strict
/// threshold at 99% of the filtered maximum -> opening -> closing.
BinaryMask disc_mask(const FundusImage& crop, const MorphologyConfig& cfg);

/// Largest 8-connected component whose eccentricity is defined, nonzero, and
/// at most eccentricity_max, if its area fraction lies inside the admissible
/// window; nullopt otherwise (callers fall back to the circle crop).
std::optional<ComponentInfo> select_component(const BinaryMask& mask,
                                              const MorphologyConfig& cfg);

/// Full pipeline.
DiscProposal propose_disc(const FundusImage& img, const MorphologyConfig& cfg);

}  // namespace pap
