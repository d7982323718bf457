#include "nn/layers.hpp"

#include <cblas.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "core/error.hpp"
#include "core/scratch.hpp"

namespace caa::nn {

namespace {

int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// cols: [C*k*k, N*OH*OW], x: [N,C,H,W]
void im2col(const float* x, int n, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, float* cols) {
    const std::int64_t spatial = std::int64_t(oh) * ow;
    const std::int64_t col_w = std::int64_t(n) * spatial;
    const int rows = c * k * k;
#pragma omp parallel for schedule(static)
    for (int row = 0; row < rows; ++row) {
        const int ci = row / (k * k);
        const int ki = (row / k) % k;
        const int kj = row % k;
        float* dst_row = cols + std::int64_t(row) * col_w;
        for (int ni = 0; ni < n; ++ni) {
            const float* src_img = x + (std::int64_t(ni) * c + ci) * h * w;
            float* dst = dst_row + std::int64_t(ni) * spatial;
            for (int oy = 0; oy < oh; ++oy) {
                const int iy = oy * stride - pad + ki;
                if (iy < 0 || iy >= h) {
                    std::memset(dst + std::int64_t(oy) * ow, 0, sizeof(float) * std::size_t(ow));
                    continue;
                }
                const float* src_row = src_img + std::int64_t(iy) * w;
                float* d = dst + std::int64_t(oy) * ow;
                if (pad == 0 || (kj >= pad && kj + (ow - 1) * stride - pad < w)) {
                    if (stride == 1) {
                        std::memcpy(d, src_row + kj - pad, sizeof(float) * std::size_t(ow));
                    } else {
                        for (int ox = 0; ox < ow; ++ox) d[ox] = src_row[ox * stride - pad + kj];
                    }
                } else {
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + kj;
                        d[ox] = (ix >= 0 && ix < w) ? src_row[ix] : 0.0f;
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: accumulates cols back into x (x must be zeroed).
// Parallel over channels only: each channel's pixels are touched exclusively
// by that channel's rows, so threads never collide.
void col2im(const float* cols, int n, int c, int h, int w, int k, int stride, int pad,
            int oh, int ow, float* x) {
    const std::int64_t spatial = std::int64_t(oh) * ow;
    const std::int64_t col_w = std::int64_t(n) * spatial;
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < c; ++ci) {
        for (int ki = 0; ki < k; ++ki) {
            for (int kj = 0; kj < k; ++kj) {
                const std::int64_t row = (std::int64_t(ci) * k + ki) * k + kj;
                const float* src_row = cols + row * col_w;
                for (int ni = 0; ni < n; ++ni) {
                    float* dst_img = x + (std::int64_t(ni) * c + ci) * h * w;
                    const float* src = src_row + std::int64_t(ni) * spatial;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride - pad + ki;
                        if (iy < 0 || iy >= h) continue;
                        float* dst = dst_img + std::int64_t(iy) * w;
                        const float* s = src + std::int64_t(oy) * ow;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride - pad + kj;
                            if (ix >= 0 && ix < w) dst[ix] += s[ox];
                        }
                    }
                }
            }
        }
    }
}

// GEMM split across threads along the output-column (or row) dimension.
// Partitions are disjoint, so results are bit-identical for any thread count.
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a,
           int lda, const float* b, int ldb, float beta, float* c, int ldc) {
    const auto ta = trans_a ? CblasTrans : CblasNoTrans;
    const auto tb = trans_b ? CblasTrans : CblasNoTrans;
    const std::int64_t work = std::int64_t(m) * n * k;
    if (work < (1 << 18)) {
        cblas_sgemm(CblasRowMajor, ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
        return;
    }
    if (n >= 2 * m) {
        const int half = (n / 2 + 15) & ~15;
#pragma omp parallel for schedule(static)
        for (int chunk = 0; chunk < 2; ++chunk) {
            const int n0 = chunk == 0 ? 0 : half;
            const int nn = chunk == 0 ? std::min(half, n) : n - half;
            if (nn <= 0) continue;
            const float* b_part = trans_b ? b + std::int64_t(n0) * ldb : b + n0;
            cblas_sgemm(CblasRowMajor, ta, tb, m, nn, k, alpha, a, lda, b_part, ldb, beta,
                        c + n0, ldc);
        }
    } else {
        const int half = (m / 2 + 7) & ~7;
#pragma omp parallel for schedule(static)
        for (int chunk = 0; chunk < 2; ++chunk) {
            const int m0 = chunk == 0 ? 0 : half;
            const int mm = chunk == 0 ? std::min(half, m) : m - half;
            if (mm <= 0) continue;
            const float* a_part = trans_a ? a + m0 : a + std::int64_t(m0) * lda;
            cblas_sgemm(CblasRowMajor, ta, tb, mm, n, k, alpha, a_part, lda, b, ldb, beta,
                        c + std::int64_t(m0) * ldc, ldc);
        }
    }
}

// [N,C,S] -> [C,N*S]
void to_channel_major(const float* x, int n, int c, std::int64_t s, float* out) {
#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < c; ++ci)
        for (int ni = 0; ni < n; ++ni)
            std::memcpy(out + (std::int64_t(ci) * n + ni) * s,
                        x + (std::int64_t(ni) * c + ci) * s, sizeof(float) * std::size_t(s));
}

// [C,N*S] -> [N,C,S]
void to_batch_major(const float* x, int n, int c, std::int64_t s, float* out) {
#pragma omp parallel for schedule(static)
    for (int ni = 0; ni < n; ++ni)
        for (int ci = 0; ci < c; ++ci)
            std::memcpy(out + (std::int64_t(ni) * c + ci) * s,
                        x + (std::int64_t(ci) * n + ni) * s, sizeof(float) * std::size_t(s));
}

void check_4d(const Tensor& x, int channels, const char* who) {
    if (x.ndim() != 4 || x.dim(1) != channels)
        raise(ErrorKind::Input, std::string(who) + ": expected [N," +
                                     std::to_string(channels) + ",H,W], got " + x.shape_str());
}

} // namespace

void Module::zero_grad() {
    std::vector<ParamRef> refs;
    collect_params("", refs);
    for (auto& r : refs)
        if (r.grad) r.grad->fill(0.0f);
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_c, int out_c, int kernel, int stride, int pad, bool bias_on)
    : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride), pad_(pad), has_bias_(bias_on) {
    weight = Tensor({out_c_, in_c_ * k_ * k_});
    weight_grad = Tensor({out_c_, in_c_ * k_ * k_});
    if (has_bias_) {
        bias = Tensor({out_c_});
        bias_grad = Tensor({out_c_});
    }
}

Tensor Conv2d::forward(const Tensor& x, bool train) {
    check_4d(x, in_c_, "conv2d");
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int oh = conv_out_dim(h, k_, stride_, pad_);
    const int ow = conv_out_dim(w, k_, stride_, pad_);
    const std::int64_t s = std::int64_t(oh) * ow;
    const int ckk = in_c_ * k_ * k_;
    const std::size_t cols_n = std::size_t(ckk) * std::size_t(n * s);

    float* cols;
    if (train) {
        if (cols_cache_.size() < cols_n) cols_cache_.resize(cols_n);
        cols = cols_cache_.data();
        in_h_ = h;
        in_w_ = w;
        in_n_ = n;
    } else {
        cols = scratch_floats(0, cols_n);
    }
    im2col(x.data(), n, in_c_, h, w, k_, stride_, pad_, oh, ow, cols);

    float* out2d = scratch_floats(1, std::size_t(out_c_) * std::size_t(n * s));
    sgemm(false, false, out_c_, int(n * s), ckk, 1.0f, weight.data(), ckk, cols, int(n * s),
          0.0f, out2d, int(n * s));

    if (has_bias_) {
        for (int oc = 0; oc < out_c_; ++oc) {
            float b = bias[oc];
            float* row = out2d + std::int64_t(oc) * n * s;
            for (std::int64_t i = 0; i < n * s; ++i) row[i] += b;
        }
    }

    Tensor y({n, out_c_, oh, ow});
    to_batch_major(out2d, n, out_c_, s, y.data());
    return y;
}

Tensor Conv2d::backward(const Tensor& dy) {
    if (cols_cache_.empty())
        raise(ErrorKind::Internal, "conv2d backward without cached forward");
    const int n = in_n_, h = in_h_, w = in_w_;
    const int oh = dy.dim(2), ow = dy.dim(3);
    const std::int64_t s = std::int64_t(oh) * ow;
    const int ckk = in_c_ * k_ * k_;

    float* dy2d = scratch_floats(0, std::size_t(out_c_) * std::size_t(n * s));
    to_channel_major(dy.data(), n, out_c_, s, dy2d);

    const float* cols = cols_cache_.data();

    // dW += dY2d x cols^T
    sgemm(false, true, out_c_, ckk, int(n * s), 1.0f, dy2d, int(n * s), cols, int(n * s),
          1.0f, weight_grad.data(), ckk);

    if (has_bias_) {
        for (int oc = 0; oc < out_c_; ++oc) {
            const float* row = dy2d + std::int64_t(oc) * n * s;
            double acc = 0.0;
            for (std::int64_t i = 0; i < n * s; ++i) acc += row[i];
            bias_grad[oc] += float(acc);
        }
    }

    // dcols = W^T x dY2d, then scatter back to input geometry.
    float* dcols = scratch_floats(1, std::size_t(ckk) * std::size_t(n * s));
    sgemm(true, false, ckk, int(n * s), out_c_, 1.0f, weight.data(), ckk, dy2d, int(n * s),
          0.0f, dcols, int(n * s));

    Tensor dx({n, in_c_, h, w});
    col2im(dcols, n, in_c_, h, w, k_, stride_, pad_, oh, ow, dx.data());
    return dx;
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "weight", &weight, &weight_grad});
    if (has_bias_) out.push_back({prefix + "bias", &bias, &bias_grad});
}

// ------------------------------------------------------- ConvTranspose2d

ConvTranspose2d::ConvTranspose2d(int in_c, int out_c, int kernel, int stride, int pad,
                                 int out_pad, bool bias_on)
    : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride), pad_(pad), out_pad_(out_pad),
      has_bias_(bias_on) {
    weight = Tensor({in_c_, out_c_ * k_ * k_});
    weight_grad = Tensor({in_c_, out_c_ * k_ * k_});
    if (has_bias_) {
        bias = Tensor({out_c_});
        bias_grad = Tensor({out_c_});
    }
}

Tensor ConvTranspose2d::forward(const Tensor& x, bool train) {
    check_4d(x, in_c_, "conv_transpose2d");
    const int n = x.dim(0), ih = x.dim(2), iw = x.dim(3);
    const int oh = (ih - 1) * stride_ - 2 * pad_ + k_ + out_pad_;
    const int ow = (iw - 1) * stride_ - 2 * pad_ + k_ + out_pad_;
    if (oh <= 0 || ow <= 0)
        raise(ErrorKind::Input, "conv_transpose2d: non-positive output size");
    const std::int64_t s_in = std::int64_t(ih) * iw;
    const int ockk = out_c_ * k_ * k_;
    const std::size_t x2d_n = std::size_t(in_c_) * std::size_t(n * s_in);

    float* x2d;
    if (train) {
        if (x2d_cache_.size() < x2d_n) x2d_cache_.resize(x2d_n);
        x2d = x2d_cache_.data();
        in_h_ = ih;
        in_w_ = iw;
        in_n_ = n;
    } else {
        x2d = scratch_floats(0, x2d_n);
    }
    to_channel_major(x.data(), n, in_c_, s_in, x2d);

    // cols = W^T x X2d; scattering cols over the output grid is exactly the
    // data-gradient of the mirrored convolution.
    float* cols = scratch_floats(1, std::size_t(ockk) * std::size_t(n * s_in));
    sgemm(true, false, ockk, int(n * s_in), in_c_, 1.0f, weight.data(), ockk, x2d,
          int(n * s_in), 0.0f, cols, int(n * s_in));

    Tensor y({n, out_c_, oh, ow});
    col2im(cols, n, out_c_, oh, ow, k_, stride_, pad_, ih, iw, y.data());

    if (has_bias_) {
        const std::int64_t s_out = std::int64_t(oh) * ow;
        for (int ni = 0; ni < n; ++ni)
            for (int oc = 0; oc < out_c_; ++oc) {
                float b = bias[oc];
                float* p = y.data() + (std::int64_t(ni) * out_c_ + oc) * s_out;
                for (std::int64_t i = 0; i < s_out; ++i) p[i] += b;
            }
    }
    return y;
}

Tensor ConvTranspose2d::backward(const Tensor& dy) {
    if (x2d_cache_.empty())
        raise(ErrorKind::Internal, "conv_transpose2d backward without cached forward");
    const int n = in_n_, ih = in_h_, iw = in_w_;
    const int oh = dy.dim(2), ow = dy.dim(3);
    const std::int64_t s_in = std::int64_t(ih) * iw;
    const std::int64_t s_out = std::int64_t(oh) * ow;
    const int ockk = out_c_ * k_ * k_;

    // dX = conv(dy) with the mirrored geometry.
    float* cols = scratch_floats(1, std::size_t(ockk) * std::size_t(n * s_in));
    im2col(dy.data(), n, out_c_, oh, ow, k_, stride_, pad_, ih, iw, cols);

    float* dx2d = scratch_floats(0, std::size_t(in_c_) * std::size_t(n * s_in));
    sgemm(false, false, in_c_, int(n * s_in), ockk, 1.0f, weight.data(), ockk, cols,
          int(n * s_in), 0.0f, dx2d, int(n * s_in));

    Tensor dx({n, in_c_, ih, iw});
    to_batch_major(dx2d, n, in_c_, s_in, dx.data());

    // dW += X2d x cols^T
    sgemm(false, true, in_c_, ockk, int(n * s_in), 1.0f, x2d_cache_.data(), int(n * s_in),
          cols, int(n * s_in), 1.0f, weight_grad.data(), ockk);

    if (has_bias_) {
        for (int oc = 0; oc < out_c_; ++oc) {
            double acc = 0.0;
            for (int ni = 0; ni < n; ++ni) {
                const float* p = dy.data() + (std::int64_t(ni) * out_c_ + oc) * s_out;
                for (std::int64_t i = 0; i < s_out; ++i) acc += p[i];
            }
            bias_grad[oc] += float(acc);
        }
    }
    return dx;
}

void ConvTranspose2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "weight", &weight, &weight_grad});
    if (has_bias_) out.push_back({prefix + "bias", &bias, &bias_grad});
}

// ----------------------------------------------------------- BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, float momentum, float eps)
    : channels_(channels), momentum_(momentum), eps_(eps) {
    gamma = Tensor::full({channels_}, 1.0f);
    beta = Tensor({channels_});
    gamma_grad = Tensor({channels_});
    beta_grad = Tensor({channels_});
    running_mean = Tensor({channels_});
    running_var = Tensor::full({channels_}, 1.0f);
}

Tensor BatchNorm2d::forward(const Tensor& x, bool train) {
    check_4d(x, channels_, "batchnorm2d");
    const int n = x.dim(0);
    const std::int64_t s = std::int64_t(x.dim(2)) * x.dim(3);
    const std::int64_t cnt = std::int64_t(n) * s;
    Tensor y(x.shape());

    if (!train) {
#pragma omp parallel for schedule(static)
        for (int c = 0; c < channels_; ++c) {
            const float invstd = 1.0f / std::sqrt(running_var[c] + eps_);
            const float g = gamma[c] * invstd;
            const float b = beta[c] - running_mean[c] * g;
            for (int ni = 0; ni < n; ++ni) {
                const float* xp = x.data() + (std::int64_t(ni) * channels_ + c) * s;
                float* yp = y.data() + (std::int64_t(ni) * channels_ + c) * s;
                for (std::int64_t i = 0; i < s; ++i) yp[i] = g * xp[i] + b;
            }
        }
        return y;
    }

    xhat_cache_ = Tensor(x.shape());
    invstd_cache_.assign(std::size_t(channels_), 0.0);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels_; ++c) {
        double sum = 0.0, sq = 0.0;
        for (int ni = 0; ni < n; ++ni) {
            const float* xp = x.data() + (std::int64_t(ni) * channels_ + c) * s;
            for (std::int64_t i = 0; i < s; ++i) {
                sum += xp[i];
                sq += double(xp[i]) * xp[i];
            }
        }
        const double mean = sum / double(cnt);
        const double var = std::max(0.0, sq / double(cnt) - mean * mean);
        const double invstd = 1.0 / std::sqrt(var + eps_);
        invstd_cache_[std::size_t(c)] = invstd;

        const float g = gamma[c], b = beta[c];
        for (int ni = 0; ni < n; ++ni) {
            const float* xp = x.data() + (std::int64_t(ni) * channels_ + c) * s;
            float* xh = xhat_cache_.data() + (std::int64_t(ni) * channels_ + c) * s;
            float* yp = y.data() + (std::int64_t(ni) * channels_ + c) * s;
            for (std::int64_t i = 0; i < s; ++i) {
                const float h = float((xp[i] - mean) * invstd);
                xh[i] = h;
                yp[i] = g * h + b;
            }
        }
        const double unbiased = cnt > 1 ? var * double(cnt) / double(cnt - 1) : var;
        running_mean[c] = (1.0f - momentum_) * running_mean[c] + momentum_ * float(mean);
        running_var[c] = (1.0f - momentum_) * running_var[c] + momentum_ * float(unbiased);
    }
    return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
    if (xhat_cache_.numel() == 0)
        raise(ErrorKind::Internal, "batchnorm backward without cached forward");
    const int n = dy.dim(0);
    const std::int64_t s = std::int64_t(dy.dim(2)) * dy.dim(3);
    const std::int64_t cnt = std::int64_t(n) * s;
    Tensor dx(dy.shape());

#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels_; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int ni = 0; ni < n; ++ni) {
            const float* dp = dy.data() + (std::int64_t(ni) * channels_ + c) * s;
            const float* xh = xhat_cache_.data() + (std::int64_t(ni) * channels_ + c) * s;
            for (std::int64_t i = 0; i < s; ++i) {
                sum_dy += dp[i];
                sum_dy_xhat += double(dp[i]) * xh[i];
            }
        }
        gamma_grad[c] += float(sum_dy_xhat);
        beta_grad[c] += float(sum_dy);

        const double scale = double(gamma[c]) * invstd_cache_[std::size_t(c)] / double(cnt);
        for (int ni = 0; ni < n; ++ni) {
            const float* dp = dy.data() + (std::int64_t(ni) * channels_ + c) * s;
            const float* xh = xhat_cache_.data() + (std::int64_t(ni) * channels_ + c) * s;
            float* dxp = dx.data() + (std::int64_t(ni) * channels_ + c) * s;
            for (std::int64_t i = 0; i < s; ++i)
                dxp[i] = float(scale * (double(cnt) * dp[i] - sum_dy - double(xh[i]) * sum_dy_xhat));
        }
    }
    return dx;
}

void BatchNorm2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "gamma", &gamma, &gamma_grad});
    out.push_back({prefix + "beta", &beta, &beta_grad});
}

void BatchNorm2d::collect_state(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "running_mean", &running_mean, nullptr});
    out.push_back({prefix + "running_var", &running_var, nullptr});
}

void BatchNorm2d::clear_cache() {
    xhat_cache_ = Tensor();
    invstd_cache_.clear();
}

// ------------------------------------------------------------------ ReLU

Tensor ReLU::forward(const Tensor& x, bool train) {
    Tensor y(x.shape());
    const float* xp = x.data();
    float* yp = y.data();
    const std::int64_t n = x.numel();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) yp[i] = xp[i] > 0.0f ? xp[i] : 0.0f;
    if (train) output_cache_ = y;
    return y;
}

Tensor ReLU::backward(const Tensor& dy) {
    if (output_cache_.numel() == 0)
        raise(ErrorKind::Internal, "relu backward without cached forward");
    Tensor dx(dy.shape());
    const float* dp = dy.data();
    const float* yp = output_cache_.data();
    float* dxp = dx.data();
    for (std::int64_t i = 0, n = dy.numel(); i < n; ++i) dxp[i] = yp[i] > 0.0f ? dp[i] : 0.0f;
    return dx;
}

// ------------------------------------------------------------- MaxPool2d

MaxPool2d::MaxPool2d(int kernel, int stride) : k_(kernel), stride_(stride) {}

Tensor MaxPool2d::forward(const Tensor& x, bool train) {
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int oh = (h - k_) / stride_ + 1;
    const int ow = (w - k_) / stride_ + 1;
    Tensor y({n, c, oh, ow});
    std::vector<std::int64_t> argmax;
    if (train) argmax.resize(std::size_t(y.numel()));

    std::int64_t oi = 0;
    for (int ni = 0; ni < n; ++ni) {
        for (int ci = 0; ci < c; ++ci) {
            const float* img = x.data() + (std::int64_t(ni) * c + ci) * h * w;
            const std::int64_t img_off = (std::int64_t(ni) * c + ci) * h * w;
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox, ++oi) {
                    float best = -std::numeric_limits<float>::infinity();
                    std::int64_t best_idx = 0;
                    for (int ki = 0; ki < k_; ++ki) {
                        const int iy = oy * stride_ + ki;
                        for (int kj = 0; kj < k_; ++kj) {
                            const int ix = ox * stride_ + kj;
                            const float v = img[std::int64_t(iy) * w + ix];
                            if (v > best) {
                                best = v;
                                best_idx = img_off + std::int64_t(iy) * w + ix;
                            }
                        }
                    }
                    y[oi] = best;
                    if (train) argmax[std::size_t(oi)] = best_idx;
                }
            }
        }
    }
    if (train) {
        argmax_cache_ = std::move(argmax);
        input_shape_ = x.shape();
    }
    return y;
}

Tensor MaxPool2d::backward(const Tensor& dy) {
    if (argmax_cache_.empty())
        raise(ErrorKind::Internal, "maxpool backward without cached forward");
    Tensor dx(input_shape_);
    const float* dp = dy.data();
    for (std::int64_t i = 0, n = dy.numel(); i < n; ++i)
        dx[argmax_cache_[std::size_t(i)]] += dp[i];
    return dx;
}

void MaxPool2d::clear_cache() {
    argmax_cache_.clear();
    input_shape_.clear();
}

// --------------------------------------------------------------- Flatten

Tensor Flatten::forward(const Tensor& x, bool train) {
    const int n = x.dim(0);
    if (train) input_shape_ = x.shape();
    return x.reshaped({n, int(x.numel() / n)});
}

Tensor Flatten::backward(const Tensor& dy) { return dy.reshaped(input_shape_); }

// ---------------------------------------------------------------- Linear

Linear::Linear(int in_f, int out_f) : in_f_(in_f), out_f_(out_f) {
    weight = Tensor({out_f_, in_f_});
    bias = Tensor({out_f_});
    weight_grad = Tensor({out_f_, in_f_});
    bias_grad = Tensor({out_f_});
}

Tensor Linear::forward(const Tensor& x, bool train) {
    if (x.ndim() != 2 || x.dim(1) != in_f_)
        raise(ErrorKind::Input, "linear: expected [N," + std::to_string(in_f_) + "], got " +
                                     x.shape_str());
    const int n = x.dim(0);
    Tensor y({n, out_f_});
    sgemm(false, true, n, out_f_, in_f_, 1.0f, x.data(), in_f_, weight.data(), in_f_, 0.0f,
          y.data(), out_f_);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < out_f_; ++j) y[std::int64_t(i) * out_f_ + j] += bias[j];
    if (train) input_cache_ = x;
    return y;
}

Tensor Linear::backward(const Tensor& dy) {
    const Tensor& x = input_cache_;
    if (x.numel() == 0) raise(ErrorKind::Internal, "linear backward without cached forward");
    const int n = x.dim(0);
    // dW += dY^T x X
    sgemm(true, false, out_f_, in_f_, n, 1.0f, dy.data(), out_f_, x.data(), in_f_, 1.0f,
          weight_grad.data(), in_f_);
    for (int j = 0; j < out_f_; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += dy[std::int64_t(i) * out_f_ + j];
        bias_grad[j] += float(acc);
    }
    Tensor dx({n, in_f_});
    sgemm(false, false, n, in_f_, out_f_, 1.0f, dy.data(), out_f_, weight.data(), in_f_, 0.0f,
          dx.data(), in_f_);
    return dx;
}

void Linear::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + "weight", &weight, &weight_grad});
    out.push_back({prefix + "bias", &bias, &bias_grad});
}

// ------------------------------------------------------------- ConvBlock

ConvBlock::ConvBlock(int in_c, int out_c, int kernel, int stride, int pad)
    : conv(in_c, out_c, kernel, stride, pad, /*bias=*/false), bn(out_c) {}

Tensor ConvBlock::forward(const Tensor& x, bool train) {
    return relu.forward(bn.forward(conv.forward(x, train), train), train);
}

Tensor ConvBlock::backward(const Tensor& dy) {
    return conv.backward(bn.backward(relu.backward(dy)));
}

void ConvBlock::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    conv.collect_params(prefix + "conv.", out);
    bn.collect_params(prefix + "bn.", out);
}

void ConvBlock::collect_state(const std::string& prefix, std::vector<ParamRef>& out) {
    bn.collect_state(prefix + "bn.", out);
}

void ConvBlock::zero_grad() {
    conv.zero_grad();
    bn.zero_grad();
}

void ConvBlock::clear_cache() {
    conv.clear_cache();
    bn.clear_cache();
    relu.clear_cache();
}

// --------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(int in_c, int out_c, int stride)
    : conv1_(in_c, out_c, 3, stride, 1, false), bn1_(out_c),
      conv2_(out_c, out_c, 3, 1, 1, false), bn2_(out_c),
      projected_(stride != 1 || in_c != out_c) {
    if (projected_) {
        proj_conv_ = std::make_unique<Conv2d>(in_c, out_c, 1, stride, 0, false);
        proj_bn_ = std::make_unique<BatchNorm2d>(out_c);
    }
}

Tensor ResidualBlock::forward(const Tensor& x, bool train) {
    Tensor h = bn1_.forward(conv1_.forward(x, train), train);
    {
        float* p = h.data();
        for (std::int64_t i = 0, n = h.numel(); i < n; ++i) p[i] = p[i] > 0.0f ? p[i] : 0.0f;
    }
    if (train) relu1_out_ = h;
    Tensor main = bn2_.forward(conv2_.forward(h, train), train);

    Tensor sc = projected_ ? proj_bn_->forward(proj_conv_->forward(x, train), train) : x;
    add_inplace(main, sc);
    float* p = main.data();
    for (std::int64_t i = 0, n = main.numel(); i < n; ++i) p[i] = p[i] > 0.0f ? p[i] : 0.0f;
    if (train) out_cache_ = main;
    return main;
}

Tensor ResidualBlock::backward(const Tensor& dy) {
    if (out_cache_.numel() == 0)
        raise(ErrorKind::Internal, "residual backward without cached forward");
    Tensor d(dy.shape());
    {
        const float* yp = out_cache_.data();
        const float* dp = dy.data();
        float* o = d.data();
        for (std::int64_t i = 0, n = dy.numel(); i < n; ++i) o[i] = yp[i] > 0.0f ? dp[i] : 0.0f;
    }
    // main branch
    Tensor dh = bn1_.backward([&] {
        Tensor t = conv2_.backward(bn2_.backward(d));
        const float* rp = relu1_out_.data();
        float* tp = t.data();
        for (std::int64_t i = 0, n = t.numel(); i < n; ++i)
            tp[i] = rp[i] > 0.0f ? tp[i] : 0.0f;
        return t;
    }());
    Tensor dx = conv1_.backward(dh);
    // shortcut branch
    if (projected_) {
        Tensor dsc = proj_conv_->backward(proj_bn_->backward(d));
        add_inplace(dx, dsc);
    } else {
        add_inplace(dx, d);
    }
    return dx;
}

void ResidualBlock::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    conv1_.collect_params(prefix + "conv1.", out);
    bn1_.collect_params(prefix + "bn1.", out);
    conv2_.collect_params(prefix + "conv2.", out);
    bn2_.collect_params(prefix + "bn2.", out);
    if (projected_) {
        proj_conv_->collect_params(prefix + "proj_conv.", out);
        proj_bn_->collect_params(prefix + "proj_bn.", out);
    }
}

void ResidualBlock::collect_state(const std::string& prefix, std::vector<ParamRef>& out) {
    bn1_.collect_state(prefix + "bn1.", out);
    bn2_.collect_state(prefix + "bn2.", out);
    if (projected_) proj_bn_->collect_state(prefix + "proj_bn.", out);
}

void ResidualBlock::zero_grad() {
    conv1_.zero_grad();
    bn1_.zero_grad();
    conv2_.zero_grad();
    bn2_.zero_grad();
    if (projected_) {
        proj_conv_->zero_grad();
        proj_bn_->zero_grad();
    }
}

void ResidualBlock::clear_cache() {
    conv1_.clear_cache();
    bn1_.clear_cache();
    conv2_.clear_cache();
    bn2_.clear_cache();
    if (projected_) {
        proj_conv_->clear_cache();
        proj_bn_->clear_cache();
    }
    relu1_out_ = Tensor();
    out_cache_ = Tensor();
}

// --------------------------------------------------------- GlobalAvgPool

Tensor GlobalAvgPool::forward(const Tensor& x, bool train) {
    const int n = x.dim(0), c = x.dim(1);
    const std::int64_t s = std::int64_t(x.dim(2)) * x.dim(3);
    Tensor y({n, c});
    for (int ni = 0; ni < n; ++ni)
        for (int ci = 0; ci < c; ++ci) {
            const float* p = x.data() + (std::int64_t(ni) * c + ci) * s;
            double acc = 0.0;
            for (std::int64_t i = 0; i < s; ++i) acc += p[i];
            y[std::int64_t(ni) * c + ci] = float(acc / double(s));
        }
    if (train) input_shape_ = x.shape();
    return y;
}

Tensor GlobalAvgPool::backward(const Tensor& dy) {
    const int n = input_shape_[0], c = input_shape_[1];
    const std::int64_t s = std::int64_t(input_shape_[2]) * input_shape_[3];
    Tensor dx(input_shape_);
    for (int ni = 0; ni < n; ++ni)
        for (int ci = 0; ci < c; ++ci) {
            const float g = dy[std::int64_t(ni) * c + ci] / float(s);
            float* p = dx.data() + (std::int64_t(ni) * c + ci) * s;
            for (std::int64_t i = 0; i < s; ++i) p[i] = g;
        }
    return dx;
}

// ------------------------------------------------------------ Sequential

Tensor Sequential::forward(const Tensor& x, bool train) {
    return forward_range(x, 0, size(), train);
}

Tensor Sequential::backward(const Tensor& dy) { return backward_range(dy, 0, size()); }

Tensor Sequential::forward_range(const Tensor& x, int from, int to, bool train) {
    if (from < 0 || to > size() || from > to)
        raise(ErrorKind::InvalidArgument, "forward_range bounds");
    Tensor h = x;
    for (int i = from; i < to; ++i) h = layers_[std::size_t(i)]->forward(h, train);
    return h;
}

Tensor Sequential::backward_range(const Tensor& dy, int from, int to) {
    Tensor d = dy;
    for (int i = to - 1; i >= from; --i) d = layers_[std::size_t(i)]->backward(d);
    return d;
}

void Sequential::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_params(prefix + std::to_string(i) + ".", out);
}

void Sequential::collect_state(const std::string& prefix, std::vector<ParamRef>& out) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_state(prefix + std::to_string(i) + ".", out);
}

void Sequential::zero_grad() {
    for (auto& l : layers_) l->zero_grad();
}

void Sequential::clear_cache() {
    for (auto& l : layers_) l->clear_cache();
}

} // namespace caa::nn
