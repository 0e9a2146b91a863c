#pragma once

#include <map>
#include <string>
#include <utility>

#include "pap/manifest.hpp"
#include "pap/rng.hpp"
#include "pap/types.hpp"

// Synthetic fundus-like image generator. Images carry a bright retina disc on
// a dark frame, a brighter optic-disc region, dark radiating vessels, and —
// for positive labels — three class proxies: blurred disc boundary, red blobs
// near the disc, and thickened peridisc vessels. Everything is seeded and
// reproducible bit-for-bit; datasets ship ground-truth geometry for oracle
// tests downstream.

namespace pap {

struct SynthParams {
  int image_size = 512;
  double retina_radius_frac = 0.92;  // of half-width
  double disc_radius_frac = 0.12;    // of retina radius
  int vessel_count = 8;
  double noise_sigma = 0.02;
  double class_effect = 0.7;  // strength of the positive-class proxies, in [0,1]
  bool render_disc = true;    // off = degenerate image for detector fallback tests

  void validate() const;
};

struct Indicators {
  bool swelling = false;
  bool hemorrhage = false;
  bool congestion = false;
};

struct SynthTruth {
  Circle disc;
  Label label = Label::pseudopapilledema;
  Indicators indicators;
};

std::pair<FundusImage, SynthTruth> generate_fundus(Seed seed, const SynthParams& params,
                                                   Label label);

/// Renders n_subjects * images_per_subject PNGs into out_dir along with
/// manifest.json and truth.json. Subjects are class-pure, roughly 45% positive
/// (exact count round(0.45*n)), and images of one subject share disc placement,
/// vessel layout, and a brightness offset, so within-subject pixel correlation
/// is real. Returns the manifest that was written.
DatasetManifest generate_dataset(Seed seed, int n_subjects, int images_per_subject,
                                 const SynthParams& params, const std::string& out_dir);

/// Ground truth by image basename, as written to truth.json.
using TruthMap = std::map<std::string, SynthTruth>;

void write_truth(const TruthMap& truth, const std::string& path);
TruthMap load_truth(const std::string& path);

}  // namespace pap
