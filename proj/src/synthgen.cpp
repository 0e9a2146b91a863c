#include "pap/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <json.hpp>

#include "pap/image_io.hpp"
#include "pap/kernels.hpp"

namespace fs = std::filesystem;

namespace pap {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double e0, double e1, double x) {
  double t = (x - e0) / (e1 - e0);
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

/// 1 well inside radius r, 0 well outside, smooth over +-edge around r.
double soft_disk(double dist, double r, double edge) {
  return 1.0 - smoothstep(r - edge, r + edge, dist);
}

// Appearance shared by all images of one subject.
struct SubjectContext {
  double disc_angle = 0.0;
  double disc_rho_frac = 0.0;  // of retina radius
  double brightness = 0.0;
  Seed vessel_seed = 0;
};

SubjectContext draw_context(Rng& rng, Seed vessel_seed) {
  SubjectContext ctx;
  ctx.disc_angle = rng.uniform(0.0, 2.0 * kPi);
  ctx.disc_rho_frac = rng.uniform(0.15, 0.40);
  ctx.brightness = rng.uniform(-0.03, 0.03);
  ctx.vessel_seed = vessel_seed;
  return ctx;
}

struct Blob {
  double cx, cy, r;
};

void stamp_vessels(GrayImage& v, const SynthParams& p, const SubjectContext& ctx, double retina_r,
                   double center, const Circle& disc, bool congestion) {
  Rng vrng(ctx.vessel_seed);
  const double congest_zone = 1.5 * disc.r;
  for (int k = 0; k < p.vessel_count; ++k) {
    double angle = 2.0 * kPi * k / p.vessel_count + vrng.uniform(-0.25, 0.25);
    const double curl = vrng.uniform(-0.02, 0.02);
    const double w0 = 2.2 * vrng.uniform(0.85, 1.15);
    double x = disc.cx + 0.8 * disc.r * std::cos(angle);
    double y = disc.cy + 0.8 * disc.r * std::sin(angle);
    const int max_steps = static_cast<int>(retina_r / 2.0) + 4;
    for (int step = 0; step < max_steps; ++step) {
      const double frac = static_cast<double>(step) / max_steps;
      double w = w0 * (1.0 - 0.55 * frac);
      const double dd = std::hypot(x - disc.cx, y - disc.cy);
      if (congestion && dd < congest_zone) w *= 1.8;
      // Stamp a soft dot; max-blend so overlapping steps do not double-darken.
      const int lo = static_cast<int>(std::floor(-w - 1.5));
      const int hi = static_cast<int>(std::ceil(w + 1.5));
      for (int dy = lo; dy <= hi; ++dy) {
        const int py = static_cast<int>(std::lround(y)) + dy;
        if (py < 0 || py >= v.height) continue;
        for (int dx = lo; dx <= hi; ++dx) {
          const int px = static_cast<int>(std::lround(x)) + dx;
          if (px < 0 || px >= v.width) continue;
          const double d = std::hypot(px - x, py - y);
          const double s = soft_disk(d, w, 0.8);
          if (s > v.at(px, py)) v.at(px, py) = s;
        }
      }
      angle += curl + vrng.uniform(-0.06, 0.06);
      x += 2.0 * std::cos(angle);
      y += 2.0 * std::sin(angle);
      if (std::hypot(x - center, y - center) > 0.98 * retina_r) break;
    }
  }
}

std::pair<FundusImage, SynthTruth> render(Seed img_seed, const SynthParams& p, Label label,
                                          const SubjectContext& ctx) {
  const int s = p.image_size;
  const double center = (s - 1) / 2.0;
  const double retina_r = p.retina_radius_frac * (s / 2.0);
  const double disc_r = p.disc_radius_frac * retina_r;

  Rng jrng(hash_seed(img_seed, 21));
  const double jx = jrng.uniform(-2.0, 2.0);
  const double jy = jrng.uniform(-2.0, 2.0);
  const double brightness = ctx.brightness + jrng.uniform(-0.01, 0.01);

  Indicators ind;
  if (label == Label::papilledema) {
    ind.swelling = jrng.uniform() < p.class_effect;
    ind.hemorrhage = jrng.uniform() < p.class_effect;
    ind.congestion = jrng.uniform() < p.class_effect;
  }

  Circle disc;
  const double rho = ctx.disc_rho_frac * retina_r;
  disc.cx = center + rho * std::cos(ctx.disc_angle) + jx;
  disc.cy = center + rho * std::sin(ctx.disc_angle) + jy;
  disc.r = disc_r;
  // Keep the disc strictly inside the retina even for extreme radius params.
  const double off = std::hypot(disc.cx - center, disc.cy - center);
  const double limit = retina_r - disc.r;
  if (off > limit) {
    const double scale = limit > 0.0 ? limit / off : 0.0;
    disc.cx = center + (disc.cx - center) * scale;
    disc.cy = center + (disc.cy - center) * scale;
  }

  std::vector<Blob> blobs;
  if (ind.hemorrhage) {
    const int n = 2 + static_cast<int>(jrng.uniform_index(3));
    for (int i = 0; i < n; ++i) {
      const double a = jrng.uniform(0.0, 2.0 * kPi);
      const double d = jrng.uniform(0.4, 1.2) * disc_r;
      blobs.push_back({disc.cx + d * std::cos(a), disc.cy + d * std::sin(a),
                       jrng.uniform(0.15, 0.35) * disc_r});
    }
  }

  GrayImage vessels(s, s);
  stamp_vessels(vessels, p, ctx, retina_r, center, disc, ind.congestion);

  const double disc_edge = ind.swelling ? 1.5 + 0.4 * p.class_effect * disc_r : 1.5;

  FundusImage img(s, s);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const double dc = std::hypot(x - center, y - center);
      const double ret = soft_disk(dc, retina_r, 2.0);
      double r = (0.32 + brightness) * ret;
      double g = (0.18 + 0.6 * brightness) * ret;
      double b = 0.06 * ret;

      if (p.render_disc) {
        const double dd = std::hypot(x - disc.cx, y - disc.cy);
        const double ds = soft_disk(dd, disc.r, disc_edge);
        r += 0.55 * ds;
        g += 0.38 * ds;
        b += 0.10 * ds;
      }

      const double v = vessels.at(x, y) * ret;
      r *= 1.0 - 0.10 * v;
      g *= 1.0 - 0.70 * v;
      b *= 1.0 - 0.25 * v;

      for (const Blob& blob : blobs) {
        const double bs = soft_disk(std::hypot(x - blob.cx, y - blob.cy), blob.r, 1.5) * ret;
        // Blood absorbs green strongly and red mildly, so hemorrhages darken
        // rather than brighten: red can only decrease, and the disc stays the
        // red-channel maximum wherever the blobs land.
        r *= 1.0 - 0.10 * p.class_effect * bs;
        g *= 1.0 - 0.55 * p.class_effect * bs;
      }

      const size_t i = static_cast<size_t>(y) * s + x;
      img.plane[0][i] = r;
      img.plane[1][i] = g;
      img.plane[2][i] = b;
    }
  }

  Rng nrng(hash_seed(img_seed, 22));
  for (auto& plane : img.plane)
    for (auto& v : plane) v = std::clamp(v + p.noise_sigma * nrng.normal(), 0.0, 1.0);

  SynthTruth truth{disc, label, ind};
  return {std::move(img), truth};
}

}  // namespace

void SynthParams::validate() const {
  if (image_size < 64) throw Error("SynthParams: image_size must be >= 64");
  auto frac = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!frac(retina_radius_frac) || !frac(disc_radius_frac))
    throw Error("SynthParams: fractions must lie in (0,1]");
  if (vessel_count < 0) throw Error("SynthParams: vessel_count must be >= 0");
  if (noise_sigma < 0.0) throw Error("SynthParams: noise_sigma must be >= 0");
  if (class_effect < 0.0 || class_effect > 1.0)
    throw Error("SynthParams: class_effect must lie in [0,1]");
}

std::pair<FundusImage, SynthTruth> generate_fundus(Seed seed, const SynthParams& params,
                                                   Label label) {
  params.validate();
  Rng crng(hash_seed(seed, 1));
  SubjectContext ctx = draw_context(crng, hash_seed(seed, 2));
  return render(hash_seed(seed, 3), params, label, ctx);
}

DatasetManifest generate_dataset(Seed seed, int n_subjects, int images_per_subject,
                                 const SynthParams& params, const std::string& out_dir) {
  params.validate();
  if (n_subjects <= 0 || images_per_subject <= 0)
    throw Error("generate_dataset: counts must be positive");
  fs::create_directories(out_dir);

  // Class-pure subjects with an exact 45% positive quota, placement shuffled.
  const int n_pos = static_cast<int>(std::lround(0.45 * n_subjects));
  std::vector<Label> labels(n_subjects, Label::pseudopapilledema);
  std::fill(labels.begin(), labels.begin() + n_pos, Label::papilledema);
  Rng lrng(hash_seed(seed, 10));
  lrng.shuffle(labels);

  struct Job {
    int subj, img;
  };
  std::vector<Job> jobs;
  for (int s = 0; s < n_subjects; ++s)
    for (int i = 0; i < images_per_subject; ++i) jobs.push_back({s, i});

  std::vector<SynthTruth> truths(jobs.size());
  std::vector<std::string> names(jobs.size());
  const int workers = kernels::worker_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
#endif
  for (size_t j = 0; j < jobs.size(); ++j) {
    const auto [subj, im] = jobs[j];
    Rng crng(hash_seed(seed, 11, static_cast<Seed>(subj)));
    SubjectContext ctx = draw_context(crng, hash_seed(seed, 13, static_cast<Seed>(subj)));
    auto [img, truth] =
        render(hash_seed(seed, 12, static_cast<Seed>(subj), static_cast<Seed>(im)), params,
               labels[subj], ctx);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "subj%03d_img%02d.png", subj, im);
    names[j] = buf;
    save_image(img, (fs::path(out_dir) / buf).string());
    truths[j] = truth;
  }

  DatasetManifest manifest;
  TruthMap truth_map;
  for (size_t j = 0; j < jobs.size(); ++j) {
    char sbuf[32];
    std::snprintf(sbuf, sizeof(sbuf), "subj%03d", jobs[j].subj);
    manifest.records.push_back(
        {(fs::path(out_dir) / names[j]).string(), sbuf, labels[jobs[j].subj]});
    truth_map[names[j]] = truths[j];
  }
  write_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  write_truth(truth_map, (fs::path(out_dir) / "truth.json").string());
  return manifest;
}

void write_truth(const TruthMap& truth, const std::string& path) {
  nlohmann::json images = nlohmann::json::object();
  for (const auto& [name, t] : truth) {
    images[name] = {{"cx", t.disc.cx},
                    {"cy", t.disc.cy},
                    {"r", t.disc.r},
                    {"label", label_name(t.label)},
                    {"indicators",
                     {{"swelling", t.indicators.swelling},
                      {"hemorrhage", t.indicators.hemorrhage},
                      {"congestion", t.indicators.congestion}}}};
  }
  std::ofstream f(path);
  if (!f) throw Error("write_truth: cannot open " + path);
  f << nlohmann::json{{"images", images}}.dump(2) << "\n";
}

TruthMap load_truth(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("load_truth: cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("load_truth: malformed JSON in " + path + ": " + e.what());
  }
  TruthMap out;
  for (const auto& [name, t] : j.at("images").items()) {
    SynthTruth truth;
    truth.disc = {t.at("cx").get<double>(), t.at("cy").get<double>(), t.at("r").get<double>()};
    truth.label = label_from_name(t.at("label").get<std::string>());
    const auto& ind = t.at("indicators");
    truth.indicators.swelling = ind.at("swelling").get<bool>();
    truth.indicators.hemorrhage = ind.at("hemorrhage").get<bool>();
    truth.indicators.congestion = ind.at("congestion").get<bool>();
    out[name] = truth;
  }
  return out;
}

}  // namespace pap
