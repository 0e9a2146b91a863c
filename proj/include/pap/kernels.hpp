#pragma once

#include <cstdint>
#include <vector>

#include "pap/types.hpp"

// Data-parallel kernels behind the pipeline. Every kernel here has a plain
// serial implementation under kernels::reference, kept as the test oracle
// for the production path. Production morphology runs on an exact Euclidean
// distance transform (identical output, far cheaper than structuring-element
// scans); convolution runs as im2col + GEMM. Parallel loops write disjoint
// outputs in a fixed order, so results are identical for any worker count.

namespace pap::kernels {

/// Worker threads used by parallel-for regions. 1 = fully serial.
int worker_count();
void set_worker_count(int n);

// ---------------------------------------------------------------------------
// Reference kernels (serial, direct definitions). Test oracles.
// ---------------------------------------------------------------------------
namespace reference {

BinaryMask erode_disk(const BinaryMask& m, int radius);
BinaryMask dilate_disk(const BinaryMask& m, int radius);
BinaryMask open_disk(const BinaryMask& m, int radius);
BinaryMask close_disk(const BinaryMask& m, int radius);
GrayImage mean_filter_disk(const GrayImage& g, int radius);

/// Naive 3x3 same-padding convolution, NCHW single image.
void conv3x3(const double* in, int cin, int h, int w, const double* weight, const double* bias,
             int cout, double* out);

}  // namespace reference

// ---------------------------------------------------------------------------
// Exact squared Euclidean distance transform (Felzenszwalb-Huttenlocher).
// ---------------------------------------------------------------------------

/// In/out: f holds 0 at source pixels and kEdtInf elsewhere; on return each
/// cell holds the exact squared distance to the nearest source.
inline constexpr double kEdtInf = 1e18;
void squared_edt(std::vector<double>& f, int width, int height);

// ---------------------------------------------------------------------------
// Production morphology. Disk structuring element {(dx,dy): dx^2+dy^2 <= r^2}.
// Border convention: erosion treats out-of-frame as foreground and dilation as
// background, so the frame edge never shrinks or grows a mask on its own — a
// full frame is a fixed point of opening and closing, and close(m) is exactly
// the set-complement dual of open(~m).
// ---------------------------------------------------------------------------

BinaryMask erode_disk(const BinaryMask& m, int radius);
BinaryMask dilate_disk(const BinaryMask& m, int radius);
BinaryMask open_disk(const BinaryMask& m, int radius);
BinaryMask close_disk(const BinaryMask& m, int radius);

GrayImage mean_filter_disk(const GrayImage& g, int radius);

// ---------------------------------------------------------------------------
// Neural-net kernels, NCHW, double precision.
// ---------------------------------------------------------------------------

/// 3x3 same-padding convolution via im2col + GEMM.
void conv3x3(const double* in, int cin, int h, int w, const double* weight, const double* bias,
             int cout, double* out);

/// Adjoint of conv3x3 with respect to the input.
void conv3x3_backward_data(const double* dout, int cin, int h, int w, const double* weight,
                           int cout, double* din);

void relu(double* x, size_t n);
void relu_backward(const double* pre, const double* dpost, size_t n, double* dpre);

/// 2x2 max pooling, stride 2; h and w must be even. argmax holds the flat
/// input index feeding each output (first-wins on ties).
void maxpool2(const double* in, int c, int h, int w, double* out, int* argmax);
void maxpool2_backward(const double* dout, int c, int h, int w, const int* argmax, double* din);

/// Global average pooling: [C][H][W] -> [C].
void global_avg_pool(const double* in, int c, int h, int w, double* out);
void global_avg_pool_backward(const double* dout, int c, int h, int w, double* din);

/// Affine map y = W x + b with W row-major [out_dim][in_dim].
void dense(const double* x, int in_dim, const double* weight, const double* bias, int out_dim,
           double* y);
void dense_backward(const double* x, const double* dy, int in_dim, int out_dim,
                    const double* weight, double* dx, double* dweight, double* dbias);

// ---------------------------------------------------------------------------
// Resampling.
// ---------------------------------------------------------------------------

GrayImage resize_bilinear(const GrayImage& g, int out_w, int out_h);
FundusImage resize_bilinear(const FundusImage& img, int out_w, int out_h);

}  // namespace pap::kernels
