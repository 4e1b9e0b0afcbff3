#pragma once

#include "imoc/tensor.hpp"

namespace imoc::ops {

// Elementwise.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor softplus(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);  // rejects non-positive inputs

// Linear algebra (2-D, row-major).
Tensor matmul(const Tensor& a, const Tensor& b);
// a (m x k) . b^T where b is stored (n x k). Saves materializing transposes.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// m (r x c) + row vector v (c), broadcast over rows.
Tensor add_rowvec(const Tensor& m, const Tensor& v);

// 2-D convolution over N x C x H x W with zero padding and floor output
// sizing: out = (in + 2*pad - kernel) / stride + 1.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride,
              std::size_t pad, const char* label = "conv2d");

// Reductions.
Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
Tensor sum_last_axis(const Tensor& x);            // [..., L] -> [...]
Tensor logsumexp_last_axis(const Tensor& x);      // [..., L] -> [...], shift-stable
Tensor logsumexp_excl_diag(const Tensor& s);      // square [n,n] -> [n], k != i per row
Tensor pnorm_rows(const Tensor& x, int p);        // p in {1,2}, norm over last axis
Tensor sql2_rows(const Tensor& x);                // squared L2 over last axis

// Structure.
Tensor reshape(const Tensor& x, Shape new_shape);
Tensor interleave_rows(const Tensor& a, const Tensor& b);  // (N,d)+(N,d) -> (2N,d)
Tensor stride_rows(const Tensor& x, std::size_t start, std::size_t step);
// out[n,c,i,j] = x[n,c, i*stride_h, j*stride_w], top-left anchored.
Tensor spatial_subsample(const Tensor& x, std::size_t stride_h, std::size_t stride_w,
                         std::size_t out_h, std::size_t out_w);

// Paired-batch helpers for contrastive losses over a (2N x 2N) similarity
// matrix where row i's positive sits at column i^1.
Tensor sum_partner_entries(const Tensor& s);       // scalar
Tensor partner_entries(const Tensor& s);           // [2N]
Tensor offdiag_nonpartner_entries(const Tensor& s);  // [2N*(2N-2)]

}  // namespace imoc::ops
