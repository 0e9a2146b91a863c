#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pap/kernels.hpp"
#include "pap/rng.hpp"
#include "pap/types.hpp"

using namespace pap;
namespace K = pap::kernels;

namespace {

BinaryMask random_mask(int w, int h, double density, Seed seed) {
  Rng rng(seed);
  BinaryMask m(w, h);
  for (auto& v : m.values) v = rng.uniform() < density ? 1 : 0;
  return m;
}

GrayImage random_gray(int w, int h, Seed seed) {
  Rng rng(seed);
  GrayImage g(w, h);
  for (auto& v : g.values) v = rng.uniform();
  return g;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {  // a <= b
  for (size_t i = 0; i < a.values.size(); ++i)
    if (a.values[i] && !b.values[i]) return false;
  return true;
}

std::vector<double> random_vec(size_t n, Seed seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = (rng.uniform() * 2.0 - 1.0) * scale;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("distance-transform morphology equals direct scans exactly") {
  const int sizes[][2] = {{1, 1}, {7, 5}, {16, 16}, {33, 17}, {40, 40}};
  const int radii[] = {0, 1, 2, 3, 5, 8};
  const double densities[] = {0.05, 0.3, 0.5, 0.8};
  int cases = 0;
  for (auto [w, h] : sizes) {
    for (int r : radii) {
      for (double d : densities) {
        BinaryMask m = random_mask(w, h, d, hash_seed(1000, w, h, r, static_cast<Seed>(d * 100)));
        CHECK(K::erode_disk(m, r) == K::reference::erode_disk(m, r));
        CHECK(K::dilate_disk(m, r) == K::reference::dilate_disk(m, r));
        CHECK(K::open_disk(m, r) == K::reference::open_disk(m, r));
        CHECK(K::close_disk(m, r) == K::reference::close_disk(m, r));
        ++cases;
      }
    }
  }
  CHECK(cases == 5 * 6 * 4);
}

TEST_CASE("opening anti-extensive, closing extensive, both idempotent") {
  int violations = 0;
  for (int i = 0; i < 200; ++i) {
    Rng pick(hash_seed(2000, i));
    const int w = 8 + static_cast<int>(pick.uniform_index(25));
    const int h = 8 + static_cast<int>(pick.uniform_index(25));
    const int r = 1 + static_cast<int>(pick.uniform_index(4));
    const double d = 0.1 + 0.8 * pick.uniform();
    BinaryMask m = random_mask(w, h, d, hash_seed(2001, i));
    BinaryMask o = K::open_disk(m, r);
    BinaryMask c = K::close_disk(m, r);
    if (!subset(o, m)) ++violations;              // opening shrinks
    if (!subset(m, c)) ++violations;              // closing grows
    if (!(K::open_disk(o, r) == o)) ++violations;  // idempotent
    if (!(K::close_disk(c, r) == c)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("erosion and dilation are dual on known shapes") {
  // Single pixel in the middle of a 9x9 frame dilates to the 13-pixel disk of
  // radius 2 and erodes away entirely.
  BinaryMask m(9, 9);
  m.set(4, 4, true);
  BinaryMask d = K::dilate_disk(m, 2);
  CHECK(d.count() == 13);
  CHECK(d.at(4, 4));
  CHECK(d.at(6, 4));
  CHECK(d.at(4, 2));
  CHECK(!d.at(6, 6));  // 2^2+2^2 > 2^2
  CHECK(K::erode_disk(m, 1).count() == 0);
  CHECK(K::erode_disk(d, 2).count() == 1);

  // Closing keeps an isolated corner pixel (extensivity holds at the border).
  BinaryMask corner(8, 8);
  corner.set(0, 0, true);
  BinaryMask closed = K::close_disk(corner, 3);
  CHECK(closed.at(0, 0));
  // Opening erases it.
  CHECK(K::open_disk(corner, 1).count() == 0);

  // A filled frame is a fixed point of both: the border-ignore convention
  // means the frame edge alone never erodes or dilates a mask.
  BinaryMask full(12, 10, true);
  CHECK(K::close_disk(full, 3) == full);
  CHECK(K::open_disk(full, 3) == full);

  // Duality: close(m) == ~open(~m).
  BinaryMask m2 = random_mask(21, 14, 0.5, 777);
  BinaryMask inv(21, 14);
  for (size_t i = 0; i < m2.values.size(); ++i) inv.values[i] = m2.values[i] ? 0 : 1;
  BinaryMask oc = K::open_disk(inv, 2);
  BinaryMask expect(21, 14);
  for (size_t i = 0; i < oc.values.size(); ++i) expect.values[i] = oc.values[i] ? 0 : 1;
  CHECK(K::close_disk(m2, 2) == expect);
}

TEST_CASE("radius zero is the identity") {
  BinaryMask m = random_mask(15, 11, 0.4, 3003);
  CHECK(K::erode_disk(m, 0) == m);
  CHECK(K::dilate_disk(m, 0) == m);
  CHECK(K::open_disk(m, 0) == m);
  CHECK(K::close_disk(m, 0) == m);
}

TEST_CASE("squared distance transform is exact on a known grid") {
  // Sources at (0,0) and (3,2) on a 5x4 grid.
  const int w = 5, h = 4;
  std::vector<double> f(w * h, K::kEdtInf);
  f[0] = 0.0;
  f[2 * w + 3] = 0.0;
  K::squared_edt(f, w, h);
  auto sq = [](int a, int b) { return static_cast<double>(a * a + b * b); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double want = std::min(sq(x, y), sq(x - 3, y - 2));
      CHECK(f[y * w + x] == want);
    }
}

TEST_CASE("mean filter matches reference bitwise and preserves constants") {
  for (int r : {0, 1, 3, 6}) {
    GrayImage g = random_gray(23, 17, hash_seed(4000, r));
    GrayImage fast = K::mean_filter_disk(g, r);
    GrayImage ref = K::reference::mean_filter_disk(g, r);
    REQUIRE(fast.values.size() == ref.values.size());
    for (size_t i = 0; i < fast.values.size(); ++i) CHECK(fast.values[i] == ref.values[i]);
  }
  GrayImage flat(19, 13, 0.37);
  GrayImage out = K::mean_filter_disk(flat, 4);
  for (double v : out.values) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("parallel workers reproduce serial results bitwise") {
  BinaryMask m = random_mask(64, 48, 0.45, 5001);
  GrayImage g = random_gray(64, 48, 5002);
  K::set_worker_count(1);
  BinaryMask e1 = K::erode_disk(m, 4), c1 = K::close_disk(m, 4);
  GrayImage f1 = K::mean_filter_disk(g, 5);
  K::set_worker_count(3);
  BinaryMask e3 = K::erode_disk(m, 4), c3 = K::close_disk(m, 4);
  GrayImage f3 = K::mean_filter_disk(g, 5);
  K::set_worker_count(1);
  CHECK(e1 == e3);
  CHECK(c1 == c3);
  CHECK(f1.values == f3.values);
}

TEST_CASE("gemm convolution matches the naive definition") {
  Rng shapes(6000);
  for (int t = 0; t < 25; ++t) {
    const int cin = 1 + static_cast<int>(shapes.uniform_index(4));
    const int cout = 1 + static_cast<int>(shapes.uniform_index(5));
    const int h = 1 + static_cast<int>(shapes.uniform_index(9));
    const int w = 1 + static_cast<int>(shapes.uniform_index(9));
    auto in = random_vec(static_cast<size_t>(cin) * h * w, hash_seed(6001, t));
    auto wt = random_vec(static_cast<size_t>(cout) * cin * 9, hash_seed(6002, t));
    auto bs = random_vec(cout, hash_seed(6003, t));
    std::vector<double> fast(static_cast<size_t>(cout) * h * w);
    std::vector<double> ref(fast.size());
    K::conv3x3(in.data(), cin, h, w, wt.data(), bs.data(), cout, fast.data());
    K::reference::conv3x3(in.data(), cin, h, w, wt.data(), bs.data(), cout, ref.data());
    for (size_t i = 0; i < fast.size(); ++i)
      CHECK(fast[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv backward-data is the adjoint of the forward map") {
  const int cin = 3, cout = 4, h = 6, w = 5;
  auto x = random_vec(static_cast<size_t>(cin) * h * w, 6101);
  auto wt = random_vec(static_cast<size_t>(cout) * cin * 9, 6102);
  std::vector<double> zero_bias(cout, 0.0);
  auto dout = random_vec(static_cast<size_t>(cout) * h * w, 6103);
  std::vector<double> y(dout.size());
  K::conv3x3(x.data(), cin, h, w, wt.data(), zero_bias.data(), cout, y.data());
  std::vector<double> dx(x.size());
  K::conv3x3_backward_data(dout.data(), cin, h, w, wt.data(), cout, dx.data());
  CHECK(dot(y, dout) == doctest::Approx(dot(x, dx)).epsilon(1e-10));
}

TEST_CASE("maxpool picks the first maximum and routes gradients to it") {
  // One channel, 4x4.
  std::vector<double> in = {
      1, 2, 0, 0,   //
      3, 4, 0, 0,   //
      5, 5, 7, 6,   //
      5, 5, 6, 8};
  std::vector<double> out(4);
  std::vector<int> arg(4);
  K::maxpool2(in.data(), 1, 4, 4, out.data(), arg.data());
  CHECK(out[0] == 4);
  CHECK(out[1] == 0);
  CHECK(out[2] == 5);
  CHECK(out[3] == 8);
  CHECK(arg[0] == 5);   // (1,1)
  CHECK(arg[1] == 2);   // tie: first scanned wins
  CHECK(arg[2] == 8);   // tie among four 5s: top-left
  CHECK(arg[3] == 15);

  std::vector<double> dout = {10, 20, 30, 40};
  std::vector<double> din(16);
  K::maxpool2_backward(dout.data(), 1, 4, 4, arg.data(), din.data());
  CHECK(din[5] == 10);
  CHECK(din[2] == 20);
  CHECK(din[8] == 30);
  CHECK(din[15] == 40);
  double total = 0;
  for (double v : din) total += v;
  CHECK(total == 100);
}

TEST_CASE("global average pool and its gradient") {
  const int c = 2, h = 2, w = 3;
  std::vector<double> in = {1, 2, 3, 4, 5, 6, /*ch1*/ 0, 0, 0, 0, 0, 12};
  std::vector<double> out(c);
  K::global_avg_pool(in.data(), c, h, w, out.data());
  CHECK(out[0] == doctest::Approx(3.5));
  CHECK(out[1] == doctest::Approx(2.0));
  std::vector<double> dout = {6.0, 12.0};
  std::vector<double> din(in.size());
  K::global_avg_pool_backward(dout.data(), c, h, w, din.data());
  for (int i = 0; i < 6; ++i) CHECK(din[i] == doctest::Approx(1.0));
  for (int i = 6; i < 12; ++i) CHECK(din[i] == doctest::Approx(2.0));
}

TEST_CASE("dense layer forward and backward") {
  // y = Wx + b with W = [[1,2,3],[0,-1,1]], b = [0.5, -0.5], x = [1, 2, 3].
  std::vector<double> wt = {1, 2, 3, 0, -1, 1};
  std::vector<double> b = {0.5, -0.5};
  std::vector<double> x = {1, 2, 3};
  std::vector<double> y(2);
  K::dense(x.data(), 3, wt.data(), b.data(), 2, y.data());
  CHECK(y[0] == doctest::Approx(14.5));
  CHECK(y[1] == doctest::Approx(0.5));

  std::vector<double> dy = {1.0, -2.0};
  std::vector<double> dx(3), dw(6, 0.0), db(2, 0.0);
  K::dense_backward(x.data(), dy.data(), 3, 2, wt.data(), dx.data(), dw.data(), db.data());
  // dx = W^T dy
  CHECK(dx[0] == doctest::Approx(1.0));
  CHECK(dx[1] == doctest::Approx(4.0));
  CHECK(dx[2] == doctest::Approx(1.0));
  // dW = dy x^T
  CHECK(dw[0] == doctest::Approx(1.0));
  CHECK(dw[2] == doctest::Approx(3.0));
  CHECK(dw[3] == doctest::Approx(-2.0));
  CHECK(dw[5] == doctest::Approx(-6.0));
  CHECK(db[0] == doctest::Approx(1.0));
  CHECK(db[1] == doctest::Approx(-2.0));

  // Adjoint identity on random data.
  const int in_dim = 17, out_dim = 9;
  auto rw = random_vec(static_cast<size_t>(out_dim) * in_dim, 6301);
  auto rb = std::vector<double>(out_dim, 0.0);
  auto rx = random_vec(in_dim, 6302);
  auto rdy = random_vec(out_dim, 6303);
  std::vector<double> ry(out_dim), rdx(in_dim);
  K::dense(rx.data(), in_dim, rw.data(), rb.data(), out_dim, ry.data());
  K::dense_backward(rx.data(), rdy.data(), in_dim, out_dim, rw.data(), rdx.data(), nullptr,
                    nullptr);
  CHECK(dot(ry, rdy) == doctest::Approx(dot(rx, rdx)).epsilon(1e-10));
}

TEST_CASE("relu forward and backward") {
  std::vector<double> x = {-1.0, 0.0, 2.5, -0.001};
  std::vector<double> pre = x;
  K::relu(x.data(), x.size());
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 0.0);
  CHECK(x[2] == 2.5);
  CHECK(x[3] == 0.0);
  std::vector<double> dpost = {1, 1, 1, 1}, dpre(4);
  K::relu_backward(pre.data(), dpost.data(), 4, dpre.data());
  CHECK(dpre[0] == 0.0);
  CHECK(dpre[1] == 0.0);  // gradient at exactly zero is zero
  CHECK(dpre[2] == 1.0);
  CHECK(dpre[3] == 0.0);
}

TEST_CASE("bilinear resize basics") {
  GrayImage g = random_gray(13, 9, 7001);
  GrayImage same = K::resize_bilinear(g, 13, 9);
  CHECK(same.values == g.values);  // identity at equal size

  GrayImage four(2, 2);
  four.at(0, 0) = 0.0;
  four.at(1, 0) = 1.0;
  four.at(0, 1) = 0.5;
  four.at(1, 1) = 0.5;
  GrayImage one = K::resize_bilinear(four, 1, 1);
  CHECK(one.at(0, 0) == doctest::Approx(0.5));  // mean of the four

  GrayImage flat(10, 6, 0.25);
  GrayImage up = K::resize_bilinear(flat, 23, 31);
  for (double v : up.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-13));

  GrayImage down = K::resize_bilinear(g, 5, 4);
  double lo = *std::min_element(g.values.begin(), g.values.end());
  double hi = *std::max_element(g.values.begin(), g.values.end());
  for (double v : down.values) {
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }

  FundusImage img(6, 6, 0.5);
  FundusImage big = K::resize_bilinear(img, 9, 9);
  CHECK(big.width == 9);
  for (int c = 0; c < 3; ++c)
    for (double v : big.plane[c]) CHECK(v == doctest::Approx(0.5));
}
