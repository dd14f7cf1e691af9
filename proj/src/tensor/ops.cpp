#include "tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace slab {

namespace {

struct SpatialView {
    int b, c, h, w;
    bool batched;
};

SpatialView spatial(const Tensor& t, const char* op) {
    if (t.rank() == 3) return {1, t.dim(0), t.dim(1), t.dim(2), false};
    if (t.rank() == 4) return {t.dim(0), t.dim(1), t.dim(2), t.dim(3), true};
    throw DomainError(std::string(op) + ": expected rank-3 or rank-4 tensor, got " +
                      shape_to_string(t.shape()));
}

std::vector<int> spatial_shape(const SpatialView& v, int c, int h, int w) {
    if (v.batched) return {v.b, c, h, w};
    return {c, h, w};
}

std::int64_t node_of(const Tensor& t) {
    Tape* tp = Tape::active();
    return (tp && tp->tracks(t)) ? t.node() : -1;
}

void attach(Tensor& out, const char* op, std::vector<std::int64_t> inputs, Tape::BackwardFn fn) {
    Tape* tp = Tape::active();
    if (!tp) return;
    bool any = false;
    for (std::int64_t id : inputs) any = any || id >= 0;
    if (!any) return;
    std::int64_t id = tp->record(op, std::move(inputs), out.shape(), std::move(fn));
    out.set_node(tp->gen(), id);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DomainError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                          " vs " + shape_to_string(b.shape()));
    }
}

// Four-lane summation: fixed combine order keeps results deterministic while
// breaking the serial dependency chain.
double dot_f64(const float* a, const float* b, int n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += static_cast<double>(a[i]) * b[i];
        s1 += static_cast<double>(a[i + 1]) * b[i + 1];
        s2 += static_cast<double>(a[i + 2]) * b[i + 2];
        s3 += static_cast<double>(a[i + 3]) * b[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

double sum_f64(const float* a, std::int64_t n) {
    double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    std::int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i];
        s1 += a[i + 1];
        s2 += a[i + 2];
        s3 += a[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i];
    return s;
}

std::vector<int> pad_index_map(int size, int width, PaddingMode mode) {
    std::vector<int> map(static_cast<std::size_t>(size + 2 * width));
    for (int o = 0; o < size + 2 * width; ++o) {
        int i = o - width;
        switch (mode) {
            case PaddingMode::Zeros:
                map[o] = (i >= 0 && i < size) ? i : -1;
                break;
            case PaddingMode::Reflect:
                if (i < 0) i = -i;
                else if (i >= size) i = 2 * (size - 1) - i;
                map[o] = i;
                break;
            case PaddingMode::Replicate:
                map[o] = std::clamp(i, 0, size - 1);
                break;
            case PaddingMode::Valid:
                map[o] = i;
                break;
        }
    }
    return map;
}

}  // namespace

bool all_finite(const Tensor& t) {
    for (float v : t.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Tensor pad2d(const Tensor& t, PaddingMode mode, int width) {
    if (width < 0) throw DomainError("pad2d: negative width");
    if (mode == PaddingMode::Valid || width == 0) return t;
    SpatialView v = spatial(t, "pad2d");
    if (mode == PaddingMode::Reflect && (width >= v.h || width >= v.w)) {
        throw DomainError("pad2d: reflect width " + std::to_string(width) +
                          " must be smaller than the spatial dims " + shape_to_string(t.shape()));
    }
    const int oh = v.h + 2 * width;
    const int ow = v.w + 2 * width;
    std::vector<int> my = pad_index_map(v.h, width, mode);
    std::vector<int> mx = pad_index_map(v.w, width, mode);

    Tensor out = Tensor::zeros(spatial_shape(v, v.c, oh, ow));
    const float* in = t.ptr();
    float* op = out.mut_data().data();
    const std::int64_t planes = static_cast<std::int64_t>(v.b) * v.c;
    for (std::int64_t p = 0; p < planes; ++p) {
        const float* ip = in + p * v.h * v.w;
        float* o = op + p * oh * ow;
        for (int y = 0; y < oh; ++y) {
            int iy = my[y];
            for (int x = 0; x < ow; ++x) {
                int ix = mx[x];
                o[y * ow + x] = (iy < 0 || ix < 0) ? 0.0f : ip[iy * v.w + ix];
            }
        }
    }

    std::int64_t tid = node_of(t);
    attach(out, "pad2d", {tid},
           [v, my, mx, oh, ow, tid](Tape& tp, std::int64_t self) {
               auto go = tp.grad_of(self);
               auto gi = tp.grad_accum(tid);
               const std::int64_t planes = static_cast<std::int64_t>(v.b) * v.c;
               for (std::int64_t p = 0; p < planes; ++p) {
                   const float* g = go.data() + p * oh * ow;
                   float* gin = gi.data() + p * v.h * v.w;
                   for (int y = 0; y < oh; ++y) {
                       int iy = my[y];
                       if (iy < 0) continue;
                       for (int x = 0; x < ow; ++x) {
                           int ix = mx[x];
                           if (ix >= 0) gin[iy * v.w + ix] += g[y * ow + x];
                       }
                   }
               }
           });
    return out;
}

namespace {

// Valid cross-correlation on an already padded input.
Tensor conv_valid(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride) {
    SpatialView v = spatial(input, "conv2d");
    const int cout = weight.dim(0);
    const int cin = weight.dim(1);
    const int k = weight.dim(2);
    const int oh = (v.h - k) / stride + 1;
    const int ow = (v.w - k) / stride + 1;

    Tensor out = Tensor::zeros(spatial_shape(v, cout, oh, ow));
    const float* in = input.ptr();
    const float* wp = weight.ptr();
    const float* bp = bias.ptr();
    float* op = out.mut_data().data();

    std::vector<double> plane(static_cast<std::size_t>(oh) * ow);
    for (int b = 0; b < v.b; ++b) {
        const float* ib = in + static_cast<std::int64_t>(b) * cin * v.h * v.w;
        for (int co = 0; co < cout; ++co) {
            std::fill(plane.begin(), plane.end(), static_cast<double>(bp[co]));
            for (int ci = 0; ci < cin; ++ci) {
                const float* ic = ib + static_cast<std::int64_t>(ci) * v.h * v.w;
                const float* wc = wp + (static_cast<std::int64_t>(co) * cin + ci) * k * k;
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        const float wv = wc[ky * k + kx];
                        for (int oy = 0; oy < oh; ++oy) {
                            const float* row = ic + (oy * stride + ky) * v.w + kx;
                            double* orow = plane.data() + static_cast<std::size_t>(oy) * ow;
                            if (stride == 1) {
                                for (int ox = 0; ox < ow; ++ox) orow[ox] += wv * row[ox];
                            } else {
                                for (int ox = 0; ox < ow; ++ox) orow[ox] += wv * row[ox * stride];
                            }
                        }
                    }
                }
            }
            float* oc = op + (static_cast<std::int64_t>(b) * cout + co) * oh * ow;
            for (std::int64_t i = 0; i < static_cast<std::int64_t>(oh) * ow; ++i) {
                oc[i] = static_cast<float>(plane[i]);
            }
        }
    }

    std::int64_t in_id = node_of(input);
    std::int64_t w_id = node_of(weight);
    std::int64_t b_id = node_of(bias);
    attach(out, "conv2d", {in_id, w_id, b_id},
           [input, weight, v, cout, cin, k, oh, ow, stride, in_id, w_id, b_id](
               Tape& tp, std::int64_t self) {
               auto go = tp.grad_of(self);
               const float* wp = weight.ptr();
               const float* in = input.ptr();

               if (in_id >= 0) {
                   auto gi = tp.grad_accum(in_id);
                   std::vector<double> gin64(static_cast<std::size_t>(cin) * v.h * v.w);
                   for (int b = 0; b < v.b; ++b) {
                       std::fill(gin64.begin(), gin64.end(), 0.0);
                       for (int co = 0; co < cout; ++co) {
                           const float* g =
                               go.data() + (static_cast<std::int64_t>(b) * cout + co) * oh * ow;
                           for (int ci = 0; ci < cin; ++ci) {
                               double* gc = gin64.data() + static_cast<std::int64_t>(ci) * v.h * v.w;
                               const float* wc =
                                   wp + (static_cast<std::int64_t>(co) * cin + ci) * k * k;
                               for (int ky = 0; ky < k; ++ky) {
                                   for (int kx = 0; kx < k; ++kx) {
                                       const float wv = wc[ky * k + kx];
                                       for (int oy = 0; oy < oh; ++oy) {
                                           double* grow = gc + (oy * stride + ky) * v.w + kx;
                                           const float* gorow = g + static_cast<std::int64_t>(oy) * ow;
                                           if (stride == 1) {
                                               for (int ox = 0; ox < ow; ++ox) grow[ox] += wv * gorow[ox];
                                           } else {
                                               for (int ox = 0; ox < ow; ++ox)
                                                   grow[ox * stride] += wv * gorow[ox];
                                           }
                                       }
                                   }
                               }
                           }
                       }
                       float* gb = gi.data() + static_cast<std::int64_t>(b) * cin * v.h * v.w;
                       for (std::int64_t i = 0; i < static_cast<std::int64_t>(cin) * v.h * v.w; ++i) {
                           gb[i] += static_cast<float>(gin64[i]);
                       }
                   }
               }

               if (w_id >= 0) {
                   auto gw = tp.grad_accum(w_id);
                   for (int co = 0; co < cout; ++co) {
                       for (int ci = 0; ci < cin; ++ci) {
                           for (int ky = 0; ky < k; ++ky) {
                               for (int kx = 0; kx < k; ++kx) {
                                   double acc = 0.0;
                                   for (int b = 0; b < v.b; ++b) {
                                       const float* g =
                                           go.data() +
                                           (static_cast<std::int64_t>(b) * cout + co) * oh * ow;
                                       const float* ic =
                                           in + (static_cast<std::int64_t>(b) * cin + ci) * v.h * v.w;
                                       if (stride == 1) {
                                           for (int oy = 0; oy < oh; ++oy) {
                                               acc += dot_f64(g + static_cast<std::int64_t>(oy) * ow,
                                                              ic + (oy + ky) * v.w + kx, ow);
                                           }
                                       } else {
                                           for (int oy = 0; oy < oh; ++oy) {
                                               const float* gorow = g + static_cast<std::int64_t>(oy) * ow;
                                               const float* irow = ic + (oy * stride + ky) * v.w + kx;
                                               for (int ox = 0; ox < ow; ++ox)
                                                   acc += static_cast<double>(gorow[ox]) *
                                                          irow[ox * stride];
                                           }
                                       }
                                   }
                                   gw[(static_cast<std::int64_t>(co) * cin + ci) * k * k + ky * k + kx] +=
                                       static_cast<float>(acc);
                               }
                           }
                       }
                   }
               }

               if (b_id >= 0) {
                   auto gb = tp.grad_accum(b_id);
                   for (int co = 0; co < cout; ++co) {
                       double acc = 0.0;
                       for (int b = 0; b < v.b; ++b) {
                           acc += sum_f64(go.data() + (static_cast<std::int64_t>(b) * cout + co) * oh * ow,
                                          static_cast<std::int64_t>(oh) * ow);
                       }
                       gb[co] += static_cast<float>(acc);
                   }
               }
           });
    return out;
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, PaddingMode mode,
              int pad, int stride) {
    SpatialView v = spatial(input, "conv2d");
    if (weight.rank() != 4) throw DomainError("conv2d: weight must be [Cout,Cin,k,k]");
    const int k = weight.dim(2);
    if (k != weight.dim(3) || k % 2 == 0) throw DomainError("conv2d: kernel must be square with odd size");
    if (weight.dim(1) != v.c) {
        throw DomainError("conv2d: input channels " + std::to_string(v.c) + " do not match weight " +
                          shape_to_string(weight.shape()));
    }
    if (bias.numel() != weight.dim(0)) throw DomainError("conv2d: bias length must equal Cout");
    if (stride < 1) throw DomainError("conv2d: stride must be >= 1");
    if (pad < 0) throw DomainError("conv2d: negative pad");

    const int eff_pad = (mode == PaddingMode::Valid) ? 0 : pad;
    if (v.h + 2 * eff_pad < k || v.w + 2 * eff_pad < k) {
        throw DomainError("conv2d: spatial dims " + shape_to_string(input.shape()) +
                          " too small for kernel " + std::to_string(k));
    }
    Tensor padded = (eff_pad > 0) ? pad2d(input, mode, eff_pad) : input;
    return conv_valid(padded, weight, bias, stride);
}

Tensor maxpool2d(const Tensor& t, int factor) {
    SpatialView v = spatial(t, "maxpool2d");
    if (factor < 1) throw DomainError("maxpool2d: factor must be >= 1");
    if (v.h % factor != 0 || v.w % factor != 0) {
        throw DomainError("maxpool2d: dims " + shape_to_string(t.shape()) +
                          " not divisible by factor " + std::to_string(factor));
    }
    const int oh = v.h / factor;
    const int ow = v.w / factor;
    Tensor out = Tensor::zeros(spatial_shape(v, v.c, oh, ow));
    const float* in = t.ptr();
    float* op = out.mut_data().data();
    const std::int64_t planes = static_cast<std::int64_t>(v.b) * v.c;
    auto argmax = std::make_shared<std::vector<std::int64_t>>(out.numel());
    for (std::int64_t p = 0; p < planes; ++p) {
        const float* ip = in + p * v.h * v.w;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                // First maximum in scan order wins ties: deterministic.
                float best = ip[oy * factor * v.w + ox * factor];
                std::int64_t bestidx = oy * factor * v.w + ox * factor;
                for (int dy = 0; dy < factor; ++dy) {
                    for (int dx = 0; dx < factor; ++dx) {
                        std::int64_t idx = (oy * factor + dy) * v.w + ox * factor + dx;
                        if (ip[idx] > best) {
                            best = ip[idx];
                            bestidx = idx;
                        }
                    }
                }
                std::int64_t oidx = p * oh * ow + oy * ow + ox;
                op[oidx] = best;
                (*argmax)[static_cast<std::size_t>(oidx)] = p * v.h * v.w + bestidx;
            }
        }
    }
    std::int64_t tid = node_of(t);
    attach(out, "maxpool2d", {tid}, [argmax, tid](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto gi = tp.grad_accum(tid);
        for (std::size_t i = 0; i < go.size(); ++i) {
            gi[static_cast<std::size_t>((*argmax)[i])] += go[i];
        }
    });
    return out;
}

Tensor upsample_nearest(const Tensor& t, int factor) {
    SpatialView v = spatial(t, "upsample_nearest");
    if (factor < 1) throw DomainError("upsample_nearest: factor must be >= 1");
    const int oh = v.h * factor;
    const int ow = v.w * factor;
    Tensor out = Tensor::zeros(spatial_shape(v, v.c, oh, ow));
    const float* in = t.ptr();
    float* op = out.mut_data().data();
    const std::int64_t planes = static_cast<std::int64_t>(v.b) * v.c;
    for (std::int64_t p = 0; p < planes; ++p) {
        const float* ip = in + p * v.h * v.w;
        float* o = op + p * oh * ow;
        for (int y = 0; y < oh; ++y) {
            const float* irow = ip + (y / factor) * v.w;
            for (int x = 0; x < ow; ++x) o[y * ow + x] = irow[x / factor];
        }
    }
    std::int64_t tid = node_of(t);
    attach(out, "upsample_nearest", {tid}, [v, factor, oh, ow, tid](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto gi = tp.grad_accum(tid);
        const std::int64_t planes = static_cast<std::int64_t>(v.b) * v.c;
        for (std::int64_t p = 0; p < planes; ++p) {
            const float* g = go.data() + p * oh * ow;
            float* gin = gi.data() + p * v.h * v.w;
            for (int y = 0; y < oh; ++y) {
                float* grow = gin + (y / factor) * v.w;
                for (int x = 0; x < ow; ++x) grow[x / factor] += g[y * ow + x];
            }
        }
    });
    return out;
}

Tensor relu(const Tensor& t) {
    Tensor out = Tensor::zeros(t.shape());
    auto in = t.data();
    auto op = out.mut_data();
    for (std::size_t i = 0; i < in.size(); ++i) op[i] = in[i] > 0.0f ? in[i] : 0.0f;
    std::int64_t tid = node_of(t);
    attach(out, "relu", {tid}, [t, tid](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto gi = tp.grad_accum(tid);
        auto in = t.data();
        for (std::size_t i = 0; i < go.size(); ++i) {
            if (in[i] > 0.0f) gi[i] += go[i];
        }
    });
    return out;
}

Tensor sigmoid(const Tensor& t) {
    Tensor out = Tensor::zeros(t.shape());
    auto in = t.data();
    auto op = out.mut_data();
    for (std::size_t i = 0; i < in.size(); ++i) {
        float x = in[i];
        if (x >= 0.0f) {
            op[i] = 1.0f / (1.0f + std::exp(-x));
        } else {
            float e = std::exp(x);
            op[i] = e / (1.0f + e);
        }
    }
    std::int64_t tid = node_of(t);
    attach(out, "sigmoid", {tid}, [out, tid](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto gi = tp.grad_accum(tid);
        auto y = out.data();
        for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i] * y[i] * (1.0f - y[i]);
    });
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    auto pa = a.data();
    auto pb = b.data();
    auto po = out.mut_data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] + pb[i];
    if (out.numel() == 1) out.set_scalar64(a.item64() + b.item64());
    std::int64_t ia = node_of(a), ib = node_of(b);
    attach(out, "add", {ia, ib}, [ia, ib](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        if (ia >= 0) {
            auto g = tp.grad_accum(ia);
            for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i];
        }
        if (ib >= 0) {
            auto g = tp.grad_accum(ib);
            for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i];
        }
    });
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.shape());
    auto pa = a.data();
    auto pb = b.data();
    auto po = out.mut_data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] - pb[i];
    if (out.numel() == 1) out.set_scalar64(a.item64() - b.item64());
    std::int64_t ia = node_of(a), ib = node_of(b);
    attach(out, "sub", {ia, ib}, [ia, ib](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        if (ia >= 0) {
            auto g = tp.grad_accum(ia);
            for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i];
        }
        if (ib >= 0) {
            auto g = tp.grad_accum(ib);
            for (std::size_t i = 0; i < go.size(); ++i) g[i] -= go[i];
        }
    });
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape());
    auto pa = a.data();
    auto pb = b.data();
    auto po = out.mut_data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] * pb[i];
    if (out.numel() == 1) out.set_scalar64(a.item64() * b.item64());
    std::int64_t ia = node_of(a), ib = node_of(b);
    attach(out, "mul", {ia, ib}, [a, b, ia, ib](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        if (ia >= 0) {
            auto g = tp.grad_accum(ia);
            auto pb = b.data();
            for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i] * pb[i];
        }
        if (ib >= 0) {
            auto g = tp.grad_accum(ib);
            auto pa = a.data();
            for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i] * pa[i];
        }
    });
    return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "div");
    Tensor out = Tensor::zeros(a.shape());
    auto pa = a.data();
    auto pb = b.data();
    auto po = out.mut_data();
    for (std::size_t i = 0; i < pa.size(); ++i) po[i] = pa[i] / pb[i];
    if (out.numel() == 1) out.set_scalar64(a.item64() / b.item64());
    std::int64_t ia = node_of(a), ib = node_of(b);
    attach(out, "div", {ia, ib}, [a, b, ia, ib](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto pa = a.data();
        auto pb = b.data();
        if (ia >= 0) {
            auto g = tp.grad_accum(ia);
            for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i] / pb[i];
        }
        if (ib >= 0) {
            auto g = tp.grad_accum(ib);
            for (std::size_t i = 0; i < go.size(); ++i) g[i] -= go[i] * pa[i] / (pb[i] * pb[i]);
        }
    });
    return out;
}

Tensor add_scalar(const Tensor& t, float c) {
    Tensor out = Tensor::zeros(t.shape());
    auto in = t.data();
    auto po = out.mut_data();
    for (std::size_t i = 0; i < in.size(); ++i) po[i] = in[i] + c;
    if (out.numel() == 1) out.set_scalar64(t.item64() + c);
    std::int64_t tid = node_of(t);
    attach(out, "add_scalar", {tid}, [tid](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto g = tp.grad_accum(tid);
        for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i];
    });
    return out;
}

Tensor mul_scalar(const Tensor& t, float c) {
    Tensor out = Tensor::zeros(t.shape());
    auto in = t.data();
    auto po = out.mut_data();
    for (std::size_t i = 0; i < in.size(); ++i) po[i] = in[i] * c;
    if (out.numel() == 1) out.set_scalar64(t.item64() * c);
    std::int64_t tid = node_of(t);
    attach(out, "mul_scalar", {tid}, [tid, c](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto g = tp.grad_accum(tid);
        for (std::size_t i = 0; i < go.size(); ++i) g[i] += go[i] * c;
    });
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    SpatialView va = spatial(a, "concat_channels");
    SpatialView vb = spatial(b, "concat_channels");
    if (va.b != vb.b || va.h != vb.h || va.w != vb.w || va.batched != vb.batched) {
        throw DomainError("concat_channels: incompatible shapes " + shape_to_string(a.shape()) +
                          " vs " + shape_to_string(b.shape()));
    }
    const int c = va.c + vb.c;
    Tensor out = Tensor::zeros(spatial_shape(va, c, va.h, va.w));
    const std::int64_t plane = static_cast<std::int64_t>(va.h) * va.w;
    float* po = out.mut_data().data();
    const float* pa = a.ptr();
    const float* pb = b.ptr();
    for (int bi = 0; bi < va.b; ++bi) {
        std::memcpy(po + bi * c * plane, pa + bi * va.c * plane,
                    sizeof(float) * static_cast<std::size_t>(va.c * plane));
        std::memcpy(po + (bi * c + va.c) * plane, pb + bi * vb.c * plane,
                    sizeof(float) * static_cast<std::size_t>(vb.c * plane));
    }
    std::int64_t ia = node_of(a), ib = node_of(b);
    attach(out, "concat_channels", {ia, ib}, [va, vb, c, plane, ia, ib](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        if (ia >= 0) {
            auto g = tp.grad_accum(ia);
            for (int bi = 0; bi < va.b; ++bi) {
                const float* src = go.data() + bi * c * plane;
                float* dst = g.data() + bi * va.c * plane;
                for (std::int64_t i = 0; i < va.c * plane; ++i) dst[i] += src[i];
            }
        }
        if (ib >= 0) {
            auto g = tp.grad_accum(ib);
            for (int bi = 0; bi < va.b; ++bi) {
                const float* src = go.data() + (bi * c + va.c) * plane;
                float* dst = g.data() + bi * vb.c * plane;
                for (std::int64_t i = 0; i < vb.c * plane; ++i) dst[i] += src[i];
            }
        }
    });
    return out;
}

Tensor crop2d(const Tensor& t, int y0, int x0, int h, int w) {
    SpatialView v = spatial(t, "crop2d");
    if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > v.h || x0 + w > v.w) {
        throw DomainError("crop2d: window out of bounds for " + shape_to_string(t.shape()));
    }
    Tensor out = Tensor::zeros(spatial_shape(v, v.c, h, w));
    const float* in = t.ptr();
    float* po = out.mut_data().data();
    const std::int64_t planes = static_cast<std::int64_t>(v.b) * v.c;
    for (std::int64_t p = 0; p < planes; ++p) {
        const float* ip = in + p * v.h * v.w;
        float* o = po + p * h * w;
        for (int y = 0; y < h; ++y) {
            std::memcpy(o + static_cast<std::int64_t>(y) * w, ip + (y0 + y) * v.w + x0,
                        sizeof(float) * static_cast<std::size_t>(w));
        }
    }
    std::int64_t tid = node_of(t);
    attach(out, "crop2d", {tid}, [v, y0, x0, h, w, tid](Tape& tp, std::int64_t self) {
        auto go = tp.grad_of(self);
        auto gi = tp.grad_accum(tid);
        const std::int64_t planes = static_cast<std::int64_t>(v.b) * v.c;
        for (std::int64_t p = 0; p < planes; ++p) {
            const float* g = go.data() + p * h * w;
            float* gin = gi.data() + p * v.h * v.w;
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) gin[(y0 + y) * v.w + x0 + x] += g[y * w + x];
            }
        }
    });
    return out;
}

Tensor sum(const Tensor& t) {
    const double s64 = sum_f64(t.ptr(), t.numel());
    Tensor out = Tensor::scalar(static_cast<float>(s64));
    out.set_scalar64(s64);
    std::int64_t tid = node_of(t);
    attach(out, "sum", {tid}, [tid](Tape& tp, std::int64_t self) {
        float g0 = tp.grad_of(self)[0];
        auto g = tp.grad_accum(tid);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += g0;
    });
    return out;
}

Tensor mean(const Tensor& t) {
    const double n = static_cast<double>(t.numel());
    const double s64 = sum_f64(t.ptr(), t.numel()) / n;
    Tensor out = Tensor::scalar(static_cast<float>(s64));
    out.set_scalar64(s64);
    std::int64_t tid = node_of(t);
    attach(out, "mean", {tid}, [tid, n](Tape& tp, std::int64_t self) {
        float g0 = static_cast<float>(tp.grad_of(self)[0] / n);
        auto g = tp.grad_accum(tid);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += g0;
    });
    return out;
}

}  // namespace slab
