#include "pap/discdetect.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "pap/kernels.hpp"
#include "pap/rng.hpp"

namespace pap {

namespace {

int scaled_radius(double frac, int min_dim) {
  return std::max(1, static_cast<int>(std::lround(frac * min_dim)));
}

struct Point {
  double x, y;
};

double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

Circle circle_2(const Point& a, const Point& b) {
  return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0, dist(a, b) / 2.0};
}

Circle circle_3(const Point& a, const Point& b, const Point& c) {
  const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
  if (std::abs(d) < 1e-9) {
    // Collinear: the farthest pair's diameter circle covers all three.
    Circle best = circle_2(a, b);
    for (const Circle& cand : {circle_2(a, c), circle_2(b, c)})
      if (cand.r > best.r) best = cand;
    return best;
  }
  const double a2 = a.x * a.x + a.y * a.y;
  const double b2 = b.x * b.x + b.y * b.y;
  const double c2 = c.x * c.x + c.y * c.y;
  const double ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
  const double uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
  Point center{ux, uy};
  return {ux, uy, std::max({dist(center, a), dist(center, b), dist(center, c)})};
}

bool covers(const Circle& c, const Point& p) {
  return c.r >= 0.0 && std::hypot(p.x - c.cx, p.y - c.cy) <= c.r + 1e-7;
}

Circle trivial_circle(const std::vector<Point>& support) {
  switch (support.size()) {
    case 0:
      return {0.0, 0.0, -1.0};
    case 1:
      return {support[0].x, support[0].y, 0.0};
    case 2:
      return circle_2(support[0], support[1]);
    default:
      return circle_3(support[0], support[1], support[2]);
  }
}

Circle welzl(std::vector<Point>& pts, size_t n, std::vector<Point>& support) {
  if (n == 0 || support.size() == 3) return trivial_circle(support);
  const Point p = pts[n - 1];
  Circle c = welzl(pts, n - 1, support);
  if (covers(c, p)) return c;
  support.push_back(p);
  c = welzl(pts, n - 1, support);
  support.pop_back();
  return c;
}

/// Convex hull, Andrew monotone chain. The minimum enclosing circle of a
/// point set is determined by its hull, which is tiny next to a raster mask.
std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() <= 2) return pts;
  auto cross = [](const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point> hull(2 * pts.size());
  size_t k = 0;
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const size_t lower = k + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace

void MorphologyConfig::validate() const {
  auto pos = [](double v) { return v > 0.0; };
  if (!pos(open_radius_frac) || !pos(close_radius_frac) || !pos(mean_filter_radius_frac) ||
      !pos(box_enlarge) || !pos(area_min_frac) || !pos(area_max_frac))
    throw Error("MorphologyConfig: fractions must be positive");
  if (area_min_frac >= area_max_frac)
    throw Error("MorphologyConfig: area_min_frac must be < area_max_frac");
  if (eccentricity_max <= 0.0 || eccentricity_max >= 1.0)
    throw Error("MorphologyConfig: eccentricity_max must lie in (0,1)");
}

GrayImage red_plane(const FundusImage& img) {
  GrayImage g(img.width, img.height);
  g.values = img.plane[0];
  return g;
}

GrayImage equalized_red(const FundusImage& img) {
  const std::vector<double>& red = img.plane[0];
  std::array<size_t, 256> hist{};
  auto bin_of = [](double v) {
    return std::min(255, static_cast<int>(v * 256.0));
  };
  for (double v : red) ++hist[bin_of(v)];
  std::array<double, 256> cdf{};
  size_t run = 0;
  const double total = static_cast<double>(red.size());
  for (int b = 0; b < 256; ++b) {
    run += hist[b];
    cdf[b] = run / total;
  }
  GrayImage out(img.width, img.height);
  for (size_t i = 0; i < red.size(); ++i) out.values[i] = cdf[bin_of(red[i])];
  return out;
}

BinaryMask retina_mask(const GrayImage& gray, const MorphologyConfig& cfg) {
  cfg.validate();
  if (gray.values.empty()) throw Error("retina_mask: empty image");
  double mean = 0.0;
  for (double v : gray.values) mean += v;
  mean /= gray.values.size();
  const double thr = 0.2 * mean;
  BinaryMask m(gray.width, gray.height);
  for (size_t i = 0; i < gray.values.size(); ++i) m.values[i] = gray.values[i] > thr ? 1 : 0;
  if (m.count() == 0) throw Error("retina_mask: empty retina (nothing above threshold)");
  const int md = std::min(gray.width, gray.height);
  m = kernels::open_disk(m, scaled_radius(cfg.open_radius_frac, md));
  m = kernels::close_disk(m, scaled_radius(cfg.close_radius_frac, md));
  if (m.count() == 0) throw Error("retina_mask: empty retina (morphology removed everything)");
  return m;
}

Circle fit_retina_circle(const BinaryMask& mask) {
  std::vector<Point> pts;
  pts.reserve(mask.count());
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(x, y)) pts.push_back({static_cast<double>(x), static_cast<double>(y)});
  if (pts.empty()) throw Error("fit_retina_circle: empty mask");

  std::vector<Point> hull = convex_hull(std::move(pts));
  // Welzl expects random order for its linear expected time.
  std::vector<size_t> order(hull.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(0x31c0de);
  rng.shuffle(order);
  std::vector<Point> shuffled(hull.size());
  for (size_t i = 0; i < hull.size(); ++i) shuffled[i] = hull[order[i]];

  std::vector<Point> support;
  Circle c = welzl(shuffled, shuffled.size(), support);
  c.r += 0.5;  // pixel = unit square around its center
  return c;
}

BoundingBox circle_crop_box(const FundusImage& img, const Circle& c, double shrink) {
  if (!(shrink > 0.0) || !(c.r > 0.0)) throw Error("circle_crop_box: degenerate circle");
  const double s = shrink * c.r;
  BoundingBox b;
  b.x0 = std::max(0, static_cast<int>(std::ceil(c.cx - s)));
  b.y0 = std::max(0, static_cast<int>(std::ceil(c.cy - s)));
  b.x1 = std::min(img.width, static_cast<int>(std::floor(c.cx + s)) + 1);
  b.y1 = std::min(img.height, static_cast<int>(std::floor(c.cy + s)) + 1);
  if (!b.valid()) throw Error("circle_crop_box: circle entirely outside image");
  return b;
}

FundusImage crop_circle(const FundusImage& img, const Circle& c, double shrink) {
  const BoundingBox b = circle_crop_box(img, c, shrink);
  const double s = shrink * c.r;
  FundusImage out(b.width(), b.height());
  for (int y = b.y0; y < b.y1; ++y)
    for (int x = b.x0; x < b.x1; ++x) {
      const bool inside = std::hypot(x - c.cx, y - c.cy) <= s;
      for (int ch = 0; ch < 3; ++ch)
        out.at(ch, x - b.x0, y - b.y0) = inside ? img.at(ch, x, y) : 0.0;
    }
  return out;
}

BinaryMask disc_mask(const FundusImage& crop, const MorphologyConfig& cfg) {
  cfg.validate();
  GrayImage red = red_plane(crop);
  const int md = std::min(crop.width, crop.height);
  GrayImage filtered = kernels::mean_filter_disk(red, scaled_radius(cfg.mean_filter_radius_frac, md));
  double max_v = 0.0;
  for (double v : filtered.values) max_v = std::max(max_v, v);
  const double thr = 0.99 * max_v;
  BinaryMask m(crop.width, crop.height);
  for (size_t i = 0; i < filtered.values.size(); ++i)
    m.values[i] = filtered.values[i] > thr ? 1 : 0;
  m = kernels::open_disk(m, scaled_radius(cfg.open_radius_frac, md));
  m = kernels::close_disk(m, scaled_radius(cfg.close_radius_frac, md));
  return m;
}

std::optional<ComponentInfo> select_component(const BinaryMask& mask,
                                              const MorphologyConfig& cfg) {
  cfg.validate();
  if (mask.values.empty()) return std::nullopt;
  const int w = mask.width, h = mask.height;
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  struct Comp {
    std::vector<int> pixels;  // flat indices
    double ecc = 0.0;
    bool valid = false;
  };
  std::vector<Comp> comps;

  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (!mask.values[start] || label[start] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    stack.push_back(start);
    label[start] = id;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      comps[id].pixels.push_back(i);
      const int x = i % w, y = i / w;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          const int ni = ny * w + nx;
          if (mask.values[ni] && label[ni] < 0) {
            label[ni] = id;
            stack.push_back(ni);
          }
        }
    }
  }

  // Best-fit-ellipse eccentricity from second central moments.
  for (auto& c : comps) {
    const double n = static_cast<double>(c.pixels.size());
    double cx = 0, cy = 0;
    for (int i : c.pixels) {
      cx += i % w;
      cy += i / w;
    }
    cx /= n;
    cy /= n;
    double m20 = 0, m02 = 0, m11 = 0;
    for (int i : c.pixels) {
      const double dx = i % w - cx, dy = i / w - cy;
      m20 += dx * dx;
      m02 += dy * dy;
      m11 += dx * dy;
    }
    m20 /= n;
    m02 /= n;
    m11 /= n;
    const double tr = m20 + m02;
    const double det = std::sqrt((m20 - m02) * (m20 - m02) + 4.0 * m11 * m11);
    const double l1 = (tr + det) / 2.0;
    const double l2 = (tr - det) / 2.0;
    if (!(l1 > 0.0)) continue;  // single pixel: eccentricity undefined
    const double ecc = std::sqrt(std::max(0.0, 1.0 - l2 / l1));
    if (ecc == 0.0) continue;  // perfectly symmetric: "no eccentricity"
    if (ecc > cfg.eccentricity_max) continue;  // line-like artifact
    c.ecc = ecc;
    c.valid = true;
  }

  int best = -1;
  for (size_t i = 0; i < comps.size(); ++i) {
    if (!comps[i].valid) continue;
    if (best < 0 || comps[i].pixels.size() > comps[best].pixels.size())
      best = static_cast<int>(i);
  }
  if (best < 0) return std::nullopt;

  const double frac = static_cast<double>(comps[best].pixels.size()) / (static_cast<double>(w) * h);
  if (frac < cfg.area_min_frac || frac > cfg.area_max_frac) return std::nullopt;

  ComponentInfo info;
  info.mask = BinaryMask(w, h);
  for (int i : comps[best].pixels) info.mask.values[i] = 1;
  info.area = comps[best].pixels.size();
  info.eccentricity = comps[best].ecc;
  return info;
}

DiscProposal propose_disc(const FundusImage& img, const MorphologyConfig& cfg) {
  cfg.validate();
  BinaryMask rmask = retina_mask(red_plane(img), cfg);
  const Circle circle = fit_retina_circle(rmask);
  const BoundingBox crop_box = circle_crop_box(img, circle, 0.8);
  FundusImage crop = crop_circle(img, circle, 0.8);

  BinaryMask dmask = disc_mask(crop, cfg);
  std::optional<ComponentInfo> comp = select_component(dmask, cfg);

  DiscProposal out;
  out.retina_circle = circle;
  if (!comp) {
    out.crop = std::move(crop);
    out.source_box = crop_box;
    out.used_fallback = true;
    return out;
  }

  // Tight bounds of the component, in crop coordinates.
  int x0 = crop.width, y0 = crop.height, x1 = -1, y1 = -1;
  for (int y = 0; y < crop.height; ++y)
    for (int x = 0; x < crop.width; ++x)
      if (comp->mask.at(x, y)) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  // Symmetric integer padding to box_enlarge times the side.
  const int pad_x = static_cast<int>(std::lround((cfg.box_enlarge - 1.0) * (x1 - x0 + 1) / 2.0));
  const int pad_y = static_cast<int>(std::lround((cfg.box_enlarge - 1.0) * (y1 - y0 + 1) / 2.0));
  BoundingBox box;
  box.x0 = std::max(0, x0 - pad_x);
  box.y0 = std::max(0, y0 - pad_y);
  box.x1 = std::min(crop.width, x1 + 1 + pad_x);
  box.y1 = std::min(crop.height, y1 + 1 + pad_y);

  // Back to original-image coordinates, then lift the sub-image from the
  // original (the circle zeroing only applies to the fallback crop).
  BoundingBox src{box.x0 + crop_box.x0, box.y0 + crop_box.y0, box.x1 + crop_box.x0,
                  box.y1 + crop_box.y0};
  FundusImage sub(src.width(), src.height());
  for (int y = src.y0; y < src.y1; ++y)
    for (int x = src.x0; x < src.x1; ++x)
      for (int ch = 0; ch < 3; ++ch) sub.at(ch, x - src.x0, y - src.y0) = img.at(ch, x, y);

  out.crop = std::move(sub);
  out.source_box = src;
  out.used_fallback = false;
  out.disc_mask = std::move(comp->mask);
  out.component_area = comp->area;
  out.component_eccentricity = comp->eccentricity;
  return out;
}

}  // namespace pap
