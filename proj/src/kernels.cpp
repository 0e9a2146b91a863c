#include "pap/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <Eigen/Dense>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pap::kernels {

namespace {

int g_workers = 1;

struct DiskOffsets {
  // Horizontal half-extent of the disk at each dy: dx in [-span[dy+r], span[dy+r]].
  std::vector<int> span;
  int radius = 0;
};

DiskOffsets disk_offsets(int radius) {
  DiskOffsets d;
  d.radius = radius;
  d.span.resize(2 * radius + 1);
  const long r2 = static_cast<long>(radius) * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    long rem = r2 - static_cast<long>(dy) * dy;
    int s = 0;
    while (static_cast<long>(s + 1) * (s + 1) <= rem) ++s;
    d.span[dy + radius] = s;
  }
  return d;
}

}  // namespace

int worker_count() { return g_workers; }

void set_worker_count(int n) { g_workers = n < 1 ? 1 : n; }

// ---------------------------------------------------------------------------
// Reference morphology: direct structuring-element scans.
// ---------------------------------------------------------------------------
namespace reference {

BinaryMask erode_disk(const BinaryMask& m, int radius) {
  if (radius < 0) throw Error("erode_disk: negative radius");
  const DiskOffsets d = disk_offsets(radius);
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      // Out-of-frame counts as foreground, so borders do not shrink.
      std::uint8_t keep = 1;
      for (int dy = -radius; keep && dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= m.height) continue;
        const int s = d.span[dy + radius];
        for (int dx = -s; dx <= s; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= m.width) continue;
          if (!m.at(xx, yy)) {
            keep = 0;
            break;
          }
        }
      }
      out.set(x, y, keep != 0);
    }
  }
  return out;
}

BinaryMask dilate_disk(const BinaryMask& m, int radius) {
  if (radius < 0) throw Error("dilate_disk: negative radius");
  const DiskOffsets d = disk_offsets(radius);
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      std::uint8_t hit = 0;
      for (int dy = -radius; !hit && dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= m.height) continue;
        const int s = d.span[dy + radius];
        for (int dx = -s; dx <= s; ++dx) {
          const int xx = x + dx;
          if (xx >= 0 && xx < m.width && m.at(xx, yy)) {
            hit = 1;
            break;
          }
        }
      }
      out.set(x, y, hit != 0);
    }
  }
  return out;
}

BinaryMask open_disk(const BinaryMask& m, int radius) {
  return reference::dilate_disk(reference::erode_disk(m, radius), radius);
}

BinaryMask close_disk(const BinaryMask& m, int radius) {
  return reference::erode_disk(reference::dilate_disk(m, radius), radius);
}

GrayImage mean_filter_disk(const GrayImage& g, int radius) {
  if (radius < 0) throw Error("mean_filter_disk: negative radius");
  const DiskOffsets d = disk_offsets(radius);
  GrayImage out(g.width, g.height);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= g.height) continue;
        const int s = d.span[dy + radius];
        for (int dx = -s; dx <= s; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= g.width) continue;
          sum += g.at(xx, yy);
          ++count;
        }
      }
      out.at(x, y) = sum / count;
    }
  }
  return out;
}

void conv3x3(const double* in, int cin, int h, int w, const double* weight, const double* bias,
             int cout, double* out) {
  const int n = h * w;
  for (int co = 0; co < cout; ++co) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = bias[co];
        for (int ci = 0; ci < cin; ++ci) {
          const double* wp = weight + ((co * cin + ci) * 9);
          const double* ip = in + ci * n;
          for (int dy = 0; dy < 3; ++dy) {
            const int yy = y + dy - 1;
            if (yy < 0 || yy >= h) continue;
            for (int dx = 0; dx < 3; ++dx) {
              const int xx = x + dx - 1;
              if (xx < 0 || xx >= w) continue;
              acc += wp[dy * 3 + dx] * ip[yy * w + xx];
            }
          }
        }
        out[co * n + y * w + x] = acc;
      }
    }
  }
}

}  // namespace reference

// ---------------------------------------------------------------------------
// Exact squared Euclidean distance transform.
// ---------------------------------------------------------------------------

namespace {

// One-dimensional lower-envelope pass (Felzenszwalb & Huttenlocher).
void edt_1d(const double* f, int n, double* d, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kEdtInf;
  z[1] = kEdtInf;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // Lone remaining parabola is dominated everywhere; replace it.
      v[k] = q;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
    }
    z[k + 1] = kEdtInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

void squared_edt(std::vector<double>& f, int width, int height) {
  if (static_cast<int>(f.size()) != width * height) throw Error("squared_edt: size mismatch");
  const int workers = g_workers;
  // Columns first.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers) if (workers > 1)
#endif
  for (int x = 0; x < width; ++x) {
    std::vector<double> col(height), d(height), z(height + 1);
    std::vector<int> v(height);
    for (int y = 0; y < height; ++y) col[y] = f[y * width + x];
    edt_1d(col.data(), height, d.data(), v.data(), z.data());
    for (int y = 0; y < height; ++y) f[y * width + x] = d[y];
  }
  // Then rows.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers) if (workers > 1)
#endif
  for (int y = 0; y < height; ++y) {
    std::vector<double> d(width), z(width + 1);
    std::vector<int> v(width);
    edt_1d(f.data() + y * width, width, d.data(), v.data(), z.data());
    std::memcpy(f.data() + y * width, d.data(), sizeof(double) * width);
  }
}

// ---------------------------------------------------------------------------
// Production morphology on the distance transform. A pixel survives erosion
// iff no background (or out-of-frame) pixel lies within the disk radius, i.e.
// iff its squared distance to the nearest such pixel exceeds r^2.
// ---------------------------------------------------------------------------

BinaryMask erode_disk(const BinaryMask& m, int radius) {
  if (radius < 0) throw Error("erode_disk: negative radius");
  // A pixel survives iff no in-frame background pixel sits within the disk
  // radius (out-of-frame counts as foreground and cannot kill anything).
  std::vector<double> f(static_cast<size_t>(m.width) * m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      f[static_cast<size_t>(y) * m.width + x] = m.at(x, y) ? kEdtInf : 0.0;
  squared_edt(f, m.width, m.height);
  const double r2 = static_cast<double>(radius) * radius;
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      out.set(x, y, m.at(x, y) && f[static_cast<size_t>(y) * m.width + x] > r2);
  return out;
}

BinaryMask dilate_disk(const BinaryMask& m, int radius) {
  if (radius < 0) throw Error("dilate_disk: negative radius");
  std::vector<double> f(static_cast<size_t>(m.width) * m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      f[static_cast<size_t>(y) * m.width + x] = m.at(x, y) ? 0.0 : kEdtInf;
  squared_edt(f, m.width, m.height);
  const double r2 = static_cast<double>(radius) * radius;
  BinaryMask out(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      out.set(x, y, f[static_cast<size_t>(y) * m.width + x] <= r2);
  return out;
}

BinaryMask open_disk(const BinaryMask& m, int radius) {
  return dilate_disk(erode_disk(m, radius), radius);
}

BinaryMask close_disk(const BinaryMask& m, int radius) {
  return erode_disk(dilate_disk(m, radius), radius);
}

GrayImage mean_filter_disk(const GrayImage& g, int radius) {
  if (radius < 0) throw Error("mean_filter_disk: negative radius");
  const DiskOffsets d = disk_offsets(radius);
  GrayImage out(g.width, g.height);
  const int workers = g_workers;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers) if (workers > 1)
#endif
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      double sum = 0.0;
      int count = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= g.height) continue;
        const int s = d.span[dy + radius];
        const int x0 = std::max(0, x - s);
        const int x1 = std::min(g.width - 1, x + s);
        const double* row = g.values.data() + static_cast<size_t>(yy) * g.width;
        for (int xx = x0; xx <= x1; ++xx) sum += row[xx];
        count += x1 - x0 + 1;
      }
      out.at(x, y) = sum / count;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Neural-net kernels.
// ---------------------------------------------------------------------------

void conv3x3(const double* in, int cin, int h, int w, const double* weight, const double* bias,
             int cout, double* out) {
  const int n = h * w;
  const int k = cin * 9;
  // im2col, column-major: column p holds the 3x3xCin patch around pixel p.
  std::vector<double> col(static_cast<size_t>(k) * n, 0.0);
  for (int ci = 0; ci < cin; ++ci) {
    const double* ip = in + static_cast<size_t>(ci) * n;
    for (int dy = 0; dy < 3; ++dy) {
      for (int dx = 0; dx < 3; ++dx) {
        const int row = ci * 9 + dy * 3 + dx;
        for (int y = 0; y < h; ++y) {
          const int yy = y + dy - 1;
          if (yy < 0 || yy >= h) continue;
          const int x0 = std::max(0, 1 - dx);
          const int x1 = std::min(w - 1, w - dx);  // inclusive bound for xx = x+dx-1 < w
          for (int x = x0; x <= x1; ++x) {
            col[static_cast<size_t>(y * w + x) * k + row] = ip[yy * w + (x + dx - 1)];
          }
        }
      }
    }
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> wm(weight, cout, k);
  Eigen::Map<const Eigen::MatrixXd> cm(col.data(), k, n);
  Eigen::Map<RowMajor> om(out, cout, n);
  om.noalias() = wm * cm;
  for (int co = 0; co < cout; ++co) {
    double* op = out + static_cast<size_t>(co) * n;
    const double b = bias[co];
    for (int p = 0; p < n; ++p) op[p] += b;
  }
}

void conv3x3_backward_data(const double* dout, int cin, int h, int w, const double* weight,
                           int cout, double* din) {
  const int n = h * w;
  std::fill(din, din + static_cast<size_t>(cin) * n, 0.0);
  for (int co = 0; co < cout; ++co) {
    const double* dop = dout + static_cast<size_t>(co) * n;
    for (int ci = 0; ci < cin; ++ci) {
      const double* wp = weight + ((static_cast<size_t>(co) * cin + ci) * 9);
      double* dip = din + static_cast<size_t>(ci) * n;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double g = dop[y * w + x];
          if (g == 0.0) continue;
          for (int dy = 0; dy < 3; ++dy) {
            const int yy = y + dy - 1;
            if (yy < 0 || yy >= h) continue;
            for (int dx = 0; dx < 3; ++dx) {
              const int xx = x + dx - 1;
              if (xx < 0 || xx >= w) continue;
              dip[yy * w + xx] += wp[dy * 3 + dx] * g;
            }
          }
        }
      }
    }
  }
}

void relu(double* x, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (x[i] < 0.0) x[i] = 0.0;
}

void relu_backward(const double* pre, const double* dpost, size_t n, double* dpre) {
  for (size_t i = 0; i < n; ++i) dpre[i] = pre[i] > 0.0 ? dpost[i] : 0.0;
}

void maxpool2(const double* in, int c, int h, int w, double* out, int* argmax) {
  if (h % 2 != 0 || w % 2 != 0) throw Error("maxpool2: odd spatial size");
  const int oh = h / 2;
  const int ow = w / 2;
  for (int ch = 0; ch < c; ++ch) {
    const double* ip = in + static_cast<size_t>(ch) * h * w;
    double* op = out + static_cast<size_t>(ch) * oh * ow;
    int* ap = argmax + static_cast<size_t>(ch) * oh * ow;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int best = (2 * y) * w + 2 * x;
        double bv = ip[best];
        const int cand[3] = {(2 * y) * w + 2 * x + 1, (2 * y + 1) * w + 2 * x,
                             (2 * y + 1) * w + 2 * x + 1};
        for (int idx : cand) {
          if (ip[idx] > bv) {
            bv = ip[idx];
            best = idx;
          }
        }
        op[y * ow + x] = bv;
        ap[y * ow + x] = ch * h * w + best;
      }
    }
  }
}

void maxpool2_backward(const double* dout, int c, int h, int w, const int* argmax, double* din) {
  const int on = (h / 2) * (w / 2);
  std::fill(din, din + static_cast<size_t>(c) * h * w, 0.0);
  for (int i = 0; i < c * on; ++i) din[argmax[i]] += dout[i];
}

void global_avg_pool(const double* in, int c, int h, int w, double* out) {
  const int n = h * w;
  for (int ch = 0; ch < c; ++ch) {
    const double* ip = in + static_cast<size_t>(ch) * n;
    double sum = 0.0;
    for (int p = 0; p < n; ++p) sum += ip[p];
    out[ch] = sum / n;
  }
}

void global_avg_pool_backward(const double* dout, int c, int h, int w, double* din) {
  const int n = h * w;
  for (int ch = 0; ch < c; ++ch) {
    const double g = dout[ch] / n;
    double* dp = din + static_cast<size_t>(ch) * n;
    for (int p = 0; p < n; ++p) dp[p] = g;
  }
}

void dense(const double* x, int in_dim, const double* weight, const double* bias, int out_dim,
           double* y) {
  for (int o = 0; o < out_dim; ++o) {
    const double* wp = weight + static_cast<size_t>(o) * in_dim;
    double acc = bias[o];
    for (int i = 0; i < in_dim; ++i) acc += wp[i] * x[i];
    y[o] = acc;
  }
}

void dense_backward(const double* x, const double* dy, int in_dim, int out_dim,
                    const double* weight, double* dx, double* dweight, double* dbias) {
  if (dx) {
    std::fill(dx, dx + in_dim, 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double* wp = weight + static_cast<size_t>(o) * in_dim;
      const double g = dy[o];
      for (int i = 0; i < in_dim; ++i) dx[i] += wp[i] * g;
    }
  }
  if (dweight) {
    for (int o = 0; o < out_dim; ++o) {
      double* dwp = dweight + static_cast<size_t>(o) * in_dim;
      const double g = dy[o];
      for (int i = 0; i < in_dim; ++i) dwp[i] += g * x[i];
    }
  }
  if (dbias) {
    for (int o = 0; o < out_dim; ++o) dbias[o] += dy[o];
  }
}

// ---------------------------------------------------------------------------
// Bilinear resampling with half-pixel alignment.
// ---------------------------------------------------------------------------

namespace {

void resize_plane(const double* in, int iw, int ih, double* out, int ow, int oh) {
  const double sx = static_cast<double>(iw) / ow;
  const double sy = static_cast<double>(ih) / oh;
  for (int y = 0; y < oh; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    if (fy < 0.0) fy = 0.0;
    if (fy > ih - 1) fy = ih - 1;
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, ih - 1);
    const double wy = fy - y0;
    for (int x = 0; x < ow; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      if (fx < 0.0) fx = 0.0;
      if (fx > iw - 1) fx = iw - 1;
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, iw - 1);
      const double wx = fx - x0;
      const double top = in[y0 * iw + x0] * (1.0 - wx) + in[y0 * iw + x1] * wx;
      const double bot = in[y1 * iw + x0] * (1.0 - wx) + in[y1 * iw + x1] * wx;
      out[y * ow + x] = top * (1.0 - wy) + bot * wy;
    }
  }
}

}  // namespace

GrayImage resize_bilinear(const GrayImage& g, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw Error("resize_bilinear: non-positive size");
  GrayImage out(out_w, out_h);
  resize_plane(g.values.data(), g.width, g.height, out.values.data(), out_w, out_h);
  return out;
}

FundusImage resize_bilinear(const FundusImage& img, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw Error("resize_bilinear: non-positive size");
  FundusImage out(out_w, out_h);
  for (int c = 0; c < 3; ++c)
    resize_plane(img.plane[c].data(), img.width, img.height, out.plane[c].data(), out_w, out_h);
  return out;
}

}  // namespace pap::kernels
