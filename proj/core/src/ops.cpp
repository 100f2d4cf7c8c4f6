/* Copyright 2026 The GRoIE Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "groie/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "groie/errors.hpp"
#include "ops_internal.hpp"

namespace groie {

using namespace detail;

namespace {

struct ConvGeom {
  std::int64_t n, cin, h, w, cout, k, stride, pad, ho, wo;
  std::int64_t cols() const { return ho * wo; }
  std::int64_t rows() const { return cin * k * k; }
};

// col[(c,ky,kx), (oy,ox)] with row stride ld, zero where the window leaves
// the image.
void im2col(const ConvGeom& g, const double* img, double* col, std::int64_t ld) {
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        double* dst = col + ((c * g.k + ky) * g.k + kx) * ld;
        for (std::int64_t oy = 0; oy < g.ho; ++oy) {
          const std::int64_t iy = oy * g.stride - g.pad + ky;
          double* row = dst + oy * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(row, row + g.wo, 0.0);
            continue;
          }
          const double* src = img + (c * g.h + iy) * g.w;
          for (std::int64_t ox = 0; ox < g.wo; ++ox) {
            const std::int64_t ix = ox * g.stride - g.pad + kx;
            row[ox] = (ix >= 0 && ix < g.w) ? src[ix] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeom& g, const double* col, std::int64_t ld, double* img) {
  for (std::int64_t c = 0; c < g.cin; ++c) {
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const double* src = col + ((c * g.k + ky) * g.k + kx) * ld;
        for (std::int64_t oy = 0; oy < g.ho; ++oy) {
          const std::int64_t iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          double* dst = img + (c * g.h + iy) * g.w;
          for (std::int64_t ox = 0; ox < g.wo; ++ox) {
            const std::int64_t ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.w) dst[ix] += src[oy * g.wo + ox];
          }
        }
      }
    }
  }
}

template <int MR, int NR>
inline void gemm_tile(std::int64_t K, const double* A, std::int64_t lda, const double* B, std::int64_t ldb,
                      double* C, std::int64_t ldc) {
  double acc[MR][NR] = {};
  for (std::int64_t k = 0; k < K; ++k) {
    const double* b = B + k * ldb;
    for (int r = 0; r < MR; ++r) {
      const double a = A[r * lda + k];
      for (int q = 0; q < NR; ++q) acc[r][q] += a * b[q];
    }
  }
  for (int r = 0; r < MR; ++r)
    for (int q = 0; q < NR; ++q) C[r * ldc + q] = acc[r][q];
}

using v8d = double __attribute__((vector_size(64)));

inline v8d load8(const double* p) {
  v8d v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

// MR x 16 block held in vector registers. Separate multiply and add, same as
// the scalar tile.
template <int MR>
inline void gemm_tile16(std::int64_t K, const double* A, std::int64_t lda, const double* B, std::int64_t ldb,
                        double* C, std::int64_t ldc) {
  v8d acc[MR][2] = {};
  for (std::int64_t k = 0; k < K; ++k) {
    const v8d b0 = load8(B + k * ldb), b1 = load8(B + k * ldb + 8);
    for (int r = 0; r < MR; ++r) {
      const v8d a = v8d{} + A[r * lda + k];
      acc[r][0] += a * b0;
      acc[r][1] += a * b1;
    }
  }
  for (int r = 0; r < MR; ++r) {
    std::memcpy(C + r * ldc, &acc[r][0], sizeof(v8d));
    std::memcpy(C + r * ldc + 8, &acc[r][1], sizeof(v8d));
  }
}

// C[M,N] = A[M,K] B[K,N]. Every element sums its K products in k order
// starting from zero, so results match a naive triple loop bitwise.
void gemm(std::int64_t M, std::int64_t N, std::int64_t K, const double* A, std::int64_t lda, const double* B,
          std::int64_t ldb, double* C, std::int64_t ldc) {
  constexpr int MR = 6;
  // Row blocks of A sized to stay in L2; within a block, column panels of B
  // outermost so a K x 16 slice is reused by every row tile.
  constexpr std::int64_t kBlockBytes = 1 << 20;
  std::int64_t MB = M;
  if (M * K * 8 > kBlockBytes) MB = std::max<std::int64_t>(MR, kBlockBytes / (8 * K) / MR * MR);
  for (std::int64_t i0 = 0; i0 < M; i0 += MB) {
    const std::int64_t i1 = std::min(M, i0 + MB);
    std::int64_t j = 0;
    for (; j + 16 <= N; j += 16) {
      std::int64_t i = i0;
      for (; i + MR <= i1; i += MR) gemm_tile16<MR>(K, A + i * lda, lda, B + j, ldb, C + i * ldc + j, ldc);
      for (; i < i1; ++i) gemm_tile16<1>(K, A + i * lda, lda, B + j, ldb, C + i * ldc + j, ldc);
    }
    for (; j + 4 <= N; j += 4) {
      std::int64_t i = i0;
      for (; i + MR <= i1; i += MR) gemm_tile<MR, 4>(K, A + i * lda, lda, B + j, ldb, C + i * ldc + j, ldc);
      for (; i < i1; ++i) gemm_tile<1, 4>(K, A + i * lda, lda, B + j, ldb, C + i * ldc + j, ldc);
    }
    for (; j < N; ++j)
      for (std::int64_t i = i0; i < i1; ++i) gemm_tile<1, 1>(K, A + i * lda, lda, B + j, ldb, C + i * ldc + j, ldc);
  }
}

// Images per GEMM: enough columns to fill the register tiles.
std::int64_t conv_chunk(const ConvGeom& g) { return std::clamp<std::int64_t>(256 / g.cols(), 1, g.n); }

}  // namespace

Var conv2d(Var input, Var weight, Var bias, int stride, int pad) {
  Tape& t = tape_of(input);
  same_tape(input, weight);
  same_tape(input, bias);
  require_rank("conv2d", input, 4);
  require_rank("conv2d", weight, 4);
  require_rank("conv2d", bias, 1);
  const Shape& xs = input.shape();
  const Shape& ws = weight.shape();
  if (ws[2] != ws[3]) throw ConfigError("conv2d: kernel must be square, got " + shape_str(ws));
  if (ws[2] % 2 == 0) throw ConfigError("conv2d: kernel size must be odd, got " + std::to_string(ws[2]));
  if (stride < 1) throw ConfigError("conv2d: stride must be positive");
  if (pad < 0) throw ConfigError("conv2d: padding must be non-negative");
  if (ws[1] != xs[1]) {
    throw DimensionError("conv2d: weight expects " + std::to_string(ws[1]) + " input channels, input " +
                         shape_str(xs) + " has " + std::to_string(xs[1]));
  }
  if (bias.shape()[0] != ws[0]) {
    throw DimensionError("conv2d: bias " + shape_str(bias.shape()) + " does not match " +
                         std::to_string(ws[0]) + " output channels");
  }
  if (xs[2] + 2 * pad < ws[2] || xs[3] + 2 * pad < ws[3]) {
    throw DimensionError("conv2d: padded input " + shape_str(xs) + " smaller than kernel " +
                         shape_str(ws));
  }
  ConvGeom g{xs[0], xs[1], xs[2], xs[3], ws[0], ws[2], stride, pad, 0, 0};
  g.ho = (g.h + 2 * pad - g.k) / stride + 1;
  g.wo = (g.w + 2 * pad - g.k) / stride + 1;

  const std::int64_t P = g.cols();
  const std::int64_t rows = g.rows();
  const std::int64_t chunk = conv_chunk(g);
  const std::int64_t in_size = g.cin * g.h * g.w;
  Tensor out(Shape{g.n, g.cout, g.ho, g.wo});
  std::vector<double> col(static_cast<std::size_t>(rows * chunk * P));
  std::vector<double> res(static_cast<std::size_t>(g.cout * chunk * P));
  const double* W = weight.value().ptr();
  const double* B = bias.value().ptr();
  for (std::int64_t n0 = 0; n0 < g.n; n0 += chunk) {
    const std::int64_t nb = std::min(chunk, g.n - n0);
    const std::int64_t Q = nb * P;
    for (std::int64_t i = 0; i < nb; ++i) im2col(g, input.value().ptr() + (n0 + i) * in_size, col.data() + i * P, Q);
    gemm(g.cout, Q, rows, W, rows, col.data(), Q, res.data(), Q);
    for (std::int64_t i = 0; i < nb; ++i) {
      for (std::int64_t co = 0; co < g.cout; ++co) {
        const double* r = res.data() + co * Q + i * P;
        double* o = out.ptr() + ((n0 + i) * g.cout + co) * P;
        for (std::int64_t p = 0; p < P; ++p) o[p] = r[p] + B[co];
      }
    }
  }
  t.add_flops(g.n * g.cout * P * rows);

  return finish("conv2d", t, std::move(out), {input, weight, bias},
                [=](Tape& tp, const Tensor&, const Tensor& gout) {
                  const bool gx = tp.requires_grad(input);
                  const bool gw = tp.requires_grad(weight);
                  const bool gb = tp.requires_grad(bias);
                  if (gb) {
                    double* dB = tp.grad(bias).ptr();
                    for (std::int64_t n = 0; n < g.n; ++n) {
                      for (std::int64_t co = 0; co < g.cout; ++co) {
                        const double* go = gout.ptr() + (n * g.cout + co) * P;
                        double s = 0.0;
                        for (std::int64_t p = 0; p < P; ++p) s += go[p];
                        dB[co] += s;
                      }
                    }
                  }
                  if (!gx && !gw) return;
                  std::vector<double> go(static_cast<std::size_t>(g.cout * chunk * P));
                  std::vector<double> colbuf, goT, dWt, Wt, gcol;
                  if (gw) {
                    colbuf.resize(static_cast<std::size_t>(rows * chunk * P));
                    goT.resize(go.size());
                    dWt.resize(static_cast<std::size_t>(rows * g.cout));
                  }
                  if (gx) {
                    gcol.resize(static_cast<std::size_t>(rows * chunk * P));
                    Wt.resize(static_cast<std::size_t>(rows * g.cout));
                    const double* Wv = weight.value().ptr();
                    for (std::int64_t co = 0; co < g.cout; ++co)
                      for (std::int64_t j = 0; j < rows; ++j) Wt[j * g.cout + co] = Wv[co * rows + j];
                  }
                  for (std::int64_t n0 = 0; n0 < g.n; n0 += chunk) {
                    const std::int64_t nb = std::min(chunk, g.n - n0);
                    const std::int64_t Q = nb * P;
                    for (std::int64_t i = 0; i < nb; ++i)
                      for (std::int64_t co = 0; co < g.cout; ++co)
                        std::copy_n(gout.ptr() + ((n0 + i) * g.cout + co) * P, P, go.data() + co * Q + i * P);
                    if (gw) {
                      for (std::int64_t i = 0; i < nb; ++i)
                        im2col(g, input.value().ptr() + (n0 + i) * in_size, colbuf.data() + i * P, Q);
                      // dW^T = col go^T keeps both operands in their natural layout
                      for (std::int64_t co = 0; co < g.cout; ++co)
                        for (std::int64_t q = 0; q < Q; ++q) goT[q * g.cout + co] = go[co * Q + q];
                      gemm(rows, g.cout, Q, colbuf.data(), Q, goT.data(), g.cout, dWt.data(), g.cout);
                      double* dW = tp.grad(weight).ptr();
                      for (std::int64_t co = 0; co < g.cout; ++co)
                        for (std::int64_t j = 0; j < rows; ++j) dW[co * rows + j] += dWt[j * g.cout + co];
                    }
                    if (gx) {
                      gemm(rows, Q, g.cout, Wt.data(), g.cout, go.data(), Q, gcol.data(), Q);
                      for (std::int64_t i = 0; i < nb; ++i)
                        col2im_add(g, gcol.data() + i * P, Q, tp.grad(input).ptr() + (n0 + i) * in_size);
                    }
                  }
                });
}

Var linear(Var input, Var weight, Var bias) {
  Tape& t = tape_of(input);
  same_tape(input, weight);
  same_tape(input, bias);
  require_rank("linear", input, 2);
  require_rank("linear", weight, 2);
  require_rank("linear", bias, 1);
  const std::int64_t R = input.dim(0), D = input.dim(1), E = weight.dim(1);
  if (weight.dim(0) != D) {
    throw DimensionError("linear: input " + shape_str(input.shape()) + " vs weight " +
                         shape_str(weight.shape()));
  }
  if (bias.dim(0) != E) {
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " vs weight " +
                         shape_str(weight.shape()));
  }
  Tensor out(Shape{R, E});
  const double* X = input.value().ptr();
  const double* W = weight.value().ptr();
  const double* B = bias.value().ptr();
  for (std::int64_t r = 0; r < R; ++r) {
    double* o = out.ptr() + r * E;
    for (std::int64_t d = 0; d < D; ++d) {
      const double xv = X[r * D + d];
      const double* w = W + d * E;
      for (std::int64_t e = 0; e < E; ++e) o[e] += xv * w[e];
    }
    for (std::int64_t e = 0; e < E; ++e) o[e] = o[e] + B[e];
  }
  t.add_flops(R * D * E);
  return finish("linear", t, std::move(out), {input, weight, bias},
                [=](Tape& tp, const Tensor&, const Tensor& gout) {
                  const double* G = gout.ptr();
                  const double* Xv = input.value().ptr();
                  const double* Wv = weight.value().ptr();
                  if (tp.requires_grad(input)) {
                    double* dX = tp.grad(input).ptr();
                    for (std::int64_t r = 0; r < R; ++r) {
                      const double* g = G + r * E;
                      for (std::int64_t d = 0; d < D; ++d) {
                        const double* w = Wv + d * E;
                        double s = 0.0;
                        for (std::int64_t e = 0; e < E; ++e) s += g[e] * w[e];
                        dX[r * D + d] += s;
                      }
                    }
                  }
                  if (tp.requires_grad(weight)) {
                    double* dW = tp.grad(weight).ptr();
                    for (std::int64_t r = 0; r < R; ++r) {
                      const double* g = G + r * E;
                      for (std::int64_t d = 0; d < D; ++d) {
                        const double xv = Xv[r * D + d];
                        double* dw = dW + d * E;
                        for (std::int64_t e = 0; e < E; ++e) dw[e] += xv * g[e];
                      }
                    }
                  }
                  if (tp.requires_grad(bias)) {
                    double* dB = tp.grad(bias).ptr();
                    for (std::int64_t r = 0; r < R; ++r) {
                      for (std::int64_t e = 0; e < E; ++e) dB[e] += G[r * E + e];
                    }
                  }
                });
}

Var bmm(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  require_rank("bmm", a, 3);
  require_rank("bmm", b, 3);
  const std::int64_t B = a.dim(0), M = a.dim(1), K = a.dim(2), N = b.dim(2);
  if (b.dim(0) != B || b.dim(1) != K) {
    throw DimensionError("bmm: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  Tensor out(Shape{B, M, N});
  for (std::int64_t i = 0; i < B; ++i) {
    const double* A = a.value().ptr() + i * M * K;
    const double* Bm = b.value().ptr() + i * K * N;
    double* O = out.ptr() + i * M * N;
    for (std::int64_t m = 0; m < M; ++m) {
      double* o = O + m * N;
      for (std::int64_t k = 0; k < K; ++k) {
        const double av = A[m * K + k];
        const double* br = Bm + k * N;
        for (std::int64_t n = 0; n < N; ++n) o[n] += av * br[n];
      }
    }
  }
  t.add_flops(B * M * K * N);
  return finish("bmm", t, std::move(out), {a, b}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    const bool ga = tp.requires_grad(a);
    const bool gb = tp.requires_grad(b);
    for (std::int64_t i = 0; i < B; ++i) {
      const double* A = a.value().ptr() + i * M * K;
      const double* Bm = b.value().ptr() + i * K * N;
      const double* G = gout.ptr() + i * M * N;
      if (ga) {
        double* dA = tp.grad(a).ptr() + i * M * K;
        for (std::int64_t m = 0; m < M; ++m) {
          const double* g = G + m * N;
          for (std::int64_t k = 0; k < K; ++k) {
            const double* br = Bm + k * N;
            double s = 0.0;
            for (std::int64_t n = 0; n < N; ++n) s += g[n] * br[n];
            dA[m * K + k] += s;
          }
        }
      }
      if (gb) {
        double* dB = tp.grad(b).ptr() + i * K * N;
        for (std::int64_t m = 0; m < M; ++m) {
          const double* g = G + m * N;
          for (std::int64_t k = 0; k < K; ++k) {
            const double av = A[m * K + k];
            double* d = dB + k * N;
            for (std::int64_t n = 0; n < N; ++n) d[n] += av * g[n];
          }
        }
      }
    }
  });
}

Var relative_position_logits(Var query, Var table, int grid) {
  Tape& t = tape_of(query);
  same_tape(query, table);
  require_rank("relative_position_logits", query, 4);
  require_rank("relative_position_logits", table, 3);
  const std::int64_t R = query.dim(0), M = query.dim(1), D = query.dim(2), P = query.dim(3);
  const std::int64_t S = grid, span = 2 * S - 1, O = span * span;
  if (P != S * S) throw DimensionError("relative_position_logits: query positions != grid^2");
  if (table.dim(0) != M || table.dim(1) != D || table.dim(2) != O) {
    throw DimensionError("relative_position_logits: table " + shape_str(table.shape()) +
                         " does not match query " + shape_str(query.shape()));
  }
  auto idx = [](std::int64_t i) { return static_cast<std::size_t>(i); };
  // offset index of key k seen from query q
  std::vector<std::int64_t> off(idx(P * P));
  for (std::int64_t q = 0; q < P; ++q) {
    for (std::int64_t k = 0; k < P; ++k) {
      const std::int64_t dy = k / S - q / S, dx = k % S - q % S;
      off[idx(q * P + k)] = (dy + S - 1) * span + (dx + S - 1);
    }
  }
  // offset-major copy of the table so the reduction over d is contiguous
  std::vector<double> tabT(idx(M * O * D));
  const double* Tb = table.value().ptr();
  for (std::int64_t m = 0; m < M; ++m) {
    for (std::int64_t d = 0; d < D; ++d) {
      for (std::int64_t o = 0; o < O; ++o) tabT[idx((m * O + o) * D + d)] = Tb[(m * D + d) * O + o];
    }
  }
  Tensor out(Shape{R, M, P, P});
  std::vector<double> qT(idx(P * D));
  const double* Q = query.value().ptr();
  for (std::int64_t r = 0; r < R; ++r) {
    for (std::int64_t m = 0; m < M; ++m) {
      const double* qm = Q + (r * M + m) * D * P;
      for (std::int64_t d = 0; d < D; ++d) {
        for (std::int64_t p = 0; p < P; ++p) qT[idx(p * D + d)] = qm[d * P + p];
      }
      const double* tm = tabT.data() + m * O * D;
      double* o = out.ptr() + (r * M + m) * P * P;
      for (std::int64_t q = 0; q < P; ++q) {
        const double* qv = qT.data() + q * D;
        for (std::int64_t k = 0; k < P; ++k) {
          const double* tv = tm + off[idx(q * P + k)] * D;
          double s = 0.0;
          for (std::int64_t d = 0; d < D; ++d) s += qv[d] * tv[d];
          o[q * P + k] = s;
        }
      }
    }
  }
  t.add_flops(R * M * P * P * D);
  return finish(
      "relative_position_logits", t, std::move(out), {query, table},
      [=](Tape& tp, const Tensor&, const Tensor& gout) {
        const bool gq = tp.requires_grad(query);
        const bool gt = tp.requires_grad(table);
        const double* Qv = query.value().ptr();
        std::vector<double> gtabT(gt ? idx(M * O * D) : 0);
        std::vector<double> qTl(idx(P * D));
        std::vector<double> gqT(idx(P * D));
        for (std::int64_t r = 0; r < R; ++r) {
          for (std::int64_t m = 0; m < M; ++m) {
            const double* qm = Qv + (r * M + m) * D * P;
            for (std::int64_t d = 0; d < D; ++d) {
              for (std::int64_t p = 0; p < P; ++p) qTl[idx(p * D + d)] = qm[d * P + p];
            }
            std::fill(gqT.begin(), gqT.end(), 0.0);
            const double* tm = tabT.data() + m * O * D;
            double* gtm = gt ? gtabT.data() + m * O * D : nullptr;
            const double* g = gout.ptr() + (r * M + m) * P * P;
            for (std::int64_t q = 0; q < P; ++q) {
              const double* qv = qTl.data() + q * D;
              double* gqv = gqT.data() + q * D;
              for (std::int64_t k = 0; k < P; ++k) {
                const double gv = g[q * P + k];
                const std::int64_t o = off[idx(q * P + k)];
                const double* tv = tm + o * D;
                for (std::int64_t d = 0; d < D; ++d) gqv[d] += gv * tv[d];
                if (gt) {
                  double* gtv = gtm + o * D;
                  for (std::int64_t d = 0; d < D; ++d) gtv[d] += gv * qv[d];
                }
              }
            }
            if (gq) {
              double* dq = tp.grad(query).ptr() + (r * M + m) * D * P;
              for (std::int64_t d = 0; d < D; ++d) {
                for (std::int64_t p = 0; p < P; ++p) dq[d * P + p] += gqT[idx(p * D + d)];
              }
            }
          }
        }
        if (gt) {
          double* dT = tp.grad(table).ptr();
          for (std::int64_t m = 0; m < M; ++m) {
            for (std::int64_t d = 0; d < D; ++d) {
              for (std::int64_t o = 0; o < O; ++o) dT[(m * D + d) * O + o] += gtabT[idx((m * O + o) * D + d)];
            }
          }
        }
      });
}

}  // namespace groie
