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

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "groie/errors.hpp"
#include "groie/ops.hpp"
#include "ops_internal.hpp"

namespace groie {

using namespace detail;

Var softmax(Var input, int axis) {
  Tape& t = tape_of(input);
  const Shape& s = input.shape();
  const int rank = input.value().rank();
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw ConfigError("softmax: axis out of range for shape " + shape_str(s));
  }
  std::int64_t outer = 1, inner = 1;
  const std::int64_t len = s[static_cast<std::size_t>(axis)];
  for (int i = 0; i < axis; ++i) outer *= s[static_cast<std::size_t>(i)];
  for (int i = axis + 1; i < rank; ++i) inner *= s[static_cast<std::size_t>(i)];
  Tensor out(s);
  const double* X = input.value().ptr();
  double* Y = out.ptr();
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t in = 0; in < inner; ++in) {
      const std::int64_t base = o * len * inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::int64_t l = 0; l < len; ++l) mx = std::max(mx, X[base + l * inner]);
      double z = 0.0;
      for (std::int64_t l = 0; l < len; ++l) {
        const double e = std::exp(X[base + l * inner] - mx);
        Y[base + l * inner] = e;
        z += e;
      }
      for (std::int64_t l = 0; l < len; ++l) Y[base + l * inner] /= z;
    }
  }
  return finish("softmax", t, std::move(out), {input},
                [=](Tape& tp, const Tensor& y, const Tensor& gout) {
                  double* dX = tp.grad(input).ptr();
                  const double* Yv = y.ptr();
                  const double* G = gout.ptr();
                  for (std::int64_t o = 0; o < outer; ++o) {
                    for (std::int64_t in = 0; in < inner; ++in) {
                      const std::int64_t base = o * len * inner + in;
                      double dot = 0.0;
                      for (std::int64_t l = 0; l < len; ++l) {
                        dot += G[base + l * inner] * Yv[base + l * inner];
                      }
                      for (std::int64_t l = 0; l < len; ++l) {
                        const std::int64_t i = base + l * inner;
                        dX[i] += Yv[i] * (G[i] - dot);
                      }
                    }
                  }
                });
}

Var relu(Var x) {
  Tape& t = tape_of(x);
  Tensor out(x.shape());
  const double* X = x.value().ptr();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = X[i] > 0.0 ? X[i] : 0.0;
  return finish("relu", t, std::move(out), {x}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    double* dX = tp.grad(x).ptr();
    const double* Xv = x.value().ptr();
    for (std::int64_t i = 0; i < gout.numel(); ++i) {
      if (Xv[i] > 0.0) dX[i] += gout[i];
    }
  });
}

Var sigmoid(Var x) {
  Tape& t = tape_of(x);
  Tensor out(x.shape());
  const double* X = x.value().ptr();
  for (std::int64_t i = 0; i < out.numel(); ++i) {
    const double v = X[i];
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  return finish("sigmoid", t, std::move(out), {x},
                [=](Tape& tp, const Tensor& y, const Tensor& gout) {
                  double* dX = tp.grad(x).ptr();
                  for (std::int64_t i = 0; i < gout.numel(); ++i) {
                    dX[i] += gout[i] * y[i] * (1.0 - y[i]);
                  }
                });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  require_same_shape("add", a, b);
  Tensor out(a.shape());
  const double* A = a.value().ptr();
  const double* B = b.value().ptr();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = A[i] + B[i];
  return finish("add", t, std::move(out), {a, b}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    if (tp.requires_grad(a)) add_into(tp.grad(a), gout);
    if (tp.requires_grad(b)) add_into(tp.grad(b), gout);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  require_same_shape("sub", a, b);
  Tensor out(a.shape());
  const double* A = a.value().ptr();
  const double* B = b.value().ptr();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = A[i] - B[i];
  return finish("sub", t, std::move(out), {a, b}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    if (tp.requires_grad(a)) add_into(tp.grad(a), gout);
    if (tp.requires_grad(b)) {
      double* d = tp.grad(b).ptr();
      for (std::int64_t i = 0; i < gout.numel(); ++i) d[i] -= gout[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  same_tape(a, b);
  require_same_shape("mul", a, b);
  Tensor out(a.shape());
  const double* A = a.value().ptr();
  const double* B = b.value().ptr();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = A[i] * B[i];
  return finish("mul", t, std::move(out), {a, b}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    if (tp.requires_grad(a)) {
      double* d = tp.grad(a).ptr();
      const double* Bv = b.value().ptr();
      for (std::int64_t i = 0; i < gout.numel(); ++i) d[i] += gout[i] * Bv[i];
    }
    if (tp.requires_grad(b)) {
      double* d = tp.grad(b).ptr();
      const double* Av = a.value().ptr();
      for (std::int64_t i = 0; i < gout.numel(); ++i) d[i] += gout[i] * Av[i];
    }
  });
}

Var scale(Var a, double c) {
  Tape& t = tape_of(a);
  Tensor out(a.shape());
  const double* A = a.value().ptr();
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = A[i] * c;
  return finish("scale", t, std::move(out), {a}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    double* d = tp.grad(a).ptr();
    for (std::int64_t i = 0; i < gout.numel(); ++i) d[i] += gout[i] * c;
  });
}

Var concat_channels(const std::vector<Var>& parts) {
  if (parts.empty()) throw DimensionError("concat_channels: no inputs");
  Tape& t = tape_of(parts[0]);
  const Shape& s0 = parts[0].shape();
  if (s0.size() != 4) throw DimensionError("concat_channels: expected rank-4 inputs");
  std::int64_t C = 0;
  std::vector<std::int64_t> offsets;
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    const Shape& s = p.shape();
    if (s.size() != 4 || s[0] != s0[0] || s[2] != s0[2] || s[3] != s0[3]) {
      throw DimensionError("concat_channels: " + shape_str(s) + " incompatible with " +
                           shape_str(s0));
    }
    offsets.push_back(C);
    C += s[1];
  }
  const std::int64_t N = s0[0], HW = s0[2] * s0[3];
  Tensor out(Shape{N, C, s0[2], s0[3]});
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Tensor& v = parts[i].value();
    const std::int64_t Ci = v.dim(1);
    for (std::int64_t n = 0; n < N; ++n) {
      std::copy_n(v.ptr() + n * Ci * HW, Ci * HW, out.ptr() + (n * C + offsets[i]) * HW);
    }
  }
  return t.record(std::move(out), parts, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (!tp.requires_grad(parts[i])) continue;
      Tensor& g = tp.grad(parts[i]);
      const std::int64_t Ci = g.dim(1);
      for (std::int64_t n = 0; n < N; ++n) {
        const double* src = gout.ptr() + (n * C + offsets[i]) * HW;
        double* dst = g.ptr() + n * Ci * HW;
        for (std::int64_t j = 0; j < Ci * HW; ++j) dst[j] += src[j];
      }
    }
  });
}

Var reshape(Var x, Shape shape) {
  Tape& t = tape_of(x);
  Tensor out = x.value().reshaped(std::move(shape));
  return t.record(std::move(out), {x}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    double* d = tp.grad(x).ptr();
    for (std::int64_t i = 0; i < gout.numel(); ++i) d[i] += gout[i];
  });
}

Var transpose_last2(Var x) {
  Tape& t = tape_of(x);
  require_rank("transpose_last2", x, 3);
  const std::int64_t B = x.dim(0), M = x.dim(1), N = x.dim(2);
  Tensor out(Shape{B, N, M});
  const double* X = x.value().ptr();
  for (std::int64_t b = 0; b < B; ++b) {
    for (std::int64_t m = 0; m < M; ++m) {
      for (std::int64_t n = 0; n < N; ++n) out[(b * N + n) * M + m] = X[(b * M + m) * N + n];
    }
  }
  return t.record(std::move(out), {x}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    double* d = tp.grad(x).ptr();
    for (std::int64_t b = 0; b < B; ++b) {
      for (std::int64_t m = 0; m < M; ++m) {
        for (std::int64_t n = 0; n < N; ++n) d[(b * M + m) * N + n] += gout[(b * N + n) * M + m];
      }
    }
  });
}

Var upsample_nearest2x(Var x) {
  Tape& t = tape_of(x);
  require_rank("upsample_nearest2x", x, 4);
  const std::int64_t NC = x.dim(0) * x.dim(1), H = x.dim(2), W = x.dim(3);
  Tensor out(Shape{x.dim(0), x.dim(1), 2 * H, 2 * W});
  const double* X = x.value().ptr();
  for (std::int64_t c = 0; c < NC; ++c) {
    for (std::int64_t y = 0; y < 2 * H; ++y) {
      const double* src = X + (c * H + y / 2) * W;
      double* dst = out.ptr() + (c * 2 * H + y) * 2 * W;
      for (std::int64_t xx = 0; xx < 2 * W; ++xx) dst[xx] = src[xx / 2];
    }
  }
  return t.record(std::move(out), {x}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    double* d = tp.grad(x).ptr();
    for (std::int64_t c = 0; c < NC; ++c) {
      for (std::int64_t y = 0; y < 2 * H; ++y) {
        const double* src = gout.ptr() + (c * 2 * H + y) * 2 * W;
        double* dst = d + (c * H + y / 2) * W;
        for (std::int64_t xx = 0; xx < 2 * W; ++xx) dst[xx / 2] += src[xx];
      }
    }
  });
}

Var select_rows(Var x, std::span<const std::int64_t> idx) {
  Tape& t = tape_of(x);
  if (x.value().rank() < 1) throw DimensionError("select_rows: scalar input");
  const std::int64_t R = x.dim(0);
  Shape s = x.shape();
  const std::int64_t row = numel_of(Shape(s.begin() + 1, s.end()));
  s[0] = static_cast<std::int64_t>(idx.size());
  Tensor out(s);
  std::vector<std::int64_t> rows(idx.begin(), idx.end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= R) {
      throw InputError("select_rows: index " + std::to_string(rows[i]) + " out of range");
    }
    std::copy_n(x.value().ptr() + rows[i] * row, row,
                out.ptr() + static_cast<std::int64_t>(i) * row);
  }
  return t.record(std::move(out), {x}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    double* d = tp.grad(x).ptr();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* src = gout.ptr() + static_cast<std::int64_t>(i) * row;
      double* dst = d + rows[i] * row;
      for (std::int64_t j = 0; j < row; ++j) dst[j] += src[j];
    }
  });
}

Var merge_rows(const std::vector<Var>& parts,
               std::span<const std::pair<int, std::int64_t>> source) {
  if (parts.empty()) throw DimensionError("merge_rows: no inputs");
  Tape& t = tape_of(parts[0]);
  const Shape& s0 = parts[0].shape();
  const Shape tail(s0.begin() + 1, s0.end());
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    if (Shape(p.shape().begin() + 1, p.shape().end()) != tail) {
      throw DimensionError("merge_rows: row shape " + shape_str(p.shape()) + " differs from " +
                           shape_str(s0));
    }
  }
  const std::int64_t row = numel_of(tail);
  Shape s = s0;
  s[0] = static_cast<std::int64_t>(source.size());
  Tensor out(s);
  std::vector<std::pair<int, std::int64_t>> src(source.begin(), source.end());
  for (std::size_t r = 0; r < src.size(); ++r) {
    const auto [part, idx] = src[r];
    if (part < 0 || part >= static_cast<int>(parts.size()) || idx < 0 ||
        idx >= parts[static_cast<std::size_t>(part)].dim(0)) {
      throw InputError("merge_rows: source row out of range");
    }
    std::copy_n(parts[static_cast<std::size_t>(part)].value().ptr() + idx * row, row,
                out.ptr() + static_cast<std::int64_t>(r) * row);
  }
  return t.record(std::move(out), parts, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    for (std::size_t r = 0; r < src.size(); ++r) {
      const Var p = parts[static_cast<std::size_t>(src[r].first)];
      if (!tp.requires_grad(p)) continue;
      double* dst = tp.grad(p).ptr() + src[r].second * row;
      const double* g = gout.ptr() + static_cast<std::int64_t>(r) * row;
      for (std::int64_t j = 0; j < row; ++j) dst[j] += g[j];
    }
  });
}

Var sum(Var x) {
  Tape& t = tape_of(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return finish("sum", t, Tensor::scalar(s), {x}, [=](Tape& tp, const Tensor&, const Tensor& gout) {
    Tensor& d = tp.grad(x);
    const double g = gout[0];
    for (std::int64_t i = 0; i < d.numel(); ++i) d[i] += g;
  });
}

Var mean(Var x) {
  const std::int64_t n = x.value().numel();
  if (n == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(n));
}

}  // namespace groie
