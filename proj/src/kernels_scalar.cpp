#include <cmath>

#include "kernels_internal.hpp"

// Reference kernels. Plain loops, no ISA assumptions. The SIMD variants
// must reproduce these bit-for-bit, so keep the per-element operation
// order here authoritative: reductions always run in ascending index
// order and multiply/add stay separate (no fma).

namespace stef::kernels {
namespace {

void matmul_acc(double* c, const double* a, const double* b,
                int64_t m0, int64_t m1, int64_t K, int64_t N) {
    for (int64_t m = m0; m < m1; ++m) {
        double* crow = c + m * N;
        const double* arow = a + m * K;
        for (int64_t k = 0; k < K; ++k) {
            const double amk = arow[k];
            const double* brow = b + k * N;
            for (int64_t n = 0; n < N; ++n) crow[n] += amk * brow[n];
        }
    }
}

void conv3x3_acc(double* out, const double* in, const double* krn,
                 int64_t img0, int64_t img1, int64_t W, int64_t H,
                 int64_t cin, int64_t cout) {
    const int64_t in_img = W * H * cin;
    const int64_t out_img = W * H * cout;
    for (int64_t i = img0; i < img1; ++i) {
        const double* ib = in + i * in_img;
        double* ob = out + i * out_img;
        for (int64_t w = 0; w < W; ++w)
            for (int64_t h = 0; h < H; ++h) {
                double* orow = ob + (w * H + h) * cout;
                for (int64_t kw = 0; kw < 3; ++kw) {
                    const int64_t iw = w + kw - 1;
                    if (iw < 0 || iw >= W) continue;
                    for (int64_t kh = 0; kh < 3; ++kh) {
                        const int64_t ih = h + kh - 1;
                        if (ih < 0 || ih >= H) continue;
                        const double* irow = ib + (iw * H + ih) * cin;
                        const double* kbase = krn + (kw * 3 + kh) * cin * cout;
                        for (int64_t ci = 0; ci < cin; ++ci) {
                            const double x = irow[ci];
                            const double* krow = kbase + ci * cout;
                            for (int64_t co = 0; co < cout; ++co)
                                orow[co] += x * krow[co];
                        }
                    }
                }
            }
    }
}

void conv3x3_wgrad_acc(double* dkrn, const double* in, const double* dout,
                       int64_t n_img, int64_t W, int64_t H,
                       int64_t cin, int64_t cout) {
    const int64_t in_img = W * H * cin;
    const int64_t out_img = W * H * cout;
    for (int64_t i = 0; i < n_img; ++i) {
        const double* ib = in + i * in_img;
        const double* db = dout + i * out_img;
        for (int64_t w = 0; w < W; ++w)
            for (int64_t h = 0; h < H; ++h) {
                const double* drow = db + (w * H + h) * cout;
                for (int64_t kw = 0; kw < 3; ++kw) {
                    const int64_t iw = w + kw - 1;
                    if (iw < 0 || iw >= W) continue;
                    for (int64_t kh = 0; kh < 3; ++kh) {
                        const int64_t ih = h + kh - 1;
                        if (ih < 0 || ih >= H) continue;
                        const double* irow = ib + (iw * H + ih) * cin;
                        double* kbase = dkrn + (kw * 3 + kh) * cin * cout;
                        for (int64_t ci = 0; ci < cin; ++ci) {
                            const double x = irow[ci];
                            double* krow = kbase + ci * cout;
                            for (int64_t co = 0; co < cout; ++co)
                                krow[co] += x * drow[co];
                        }
                    }
                }
            }
    }
}

void col_sum_acc(double* acc, const double* x, int64_t rows, int64_t cols) {
    for (int64_t r = 0; r < rows; ++r) {
        const double* row = x + r * cols;
        for (int64_t c = 0; c < cols; ++c) acc[c] += row[c];
    }
}

void add(double* out, const double* a, const double* b, int64_t n) {
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(double* out, const double* a, const double* b, int64_t n) {
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(double* out, const double* a, const double* b, int64_t n) {
    for (int64_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double* y, double alpha, const double* x, int64_t n) {
    for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void relu(double* out, const double* x, int64_t n) {
    for (int64_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc(double* dx, const double* x, const double* dy, int64_t n) {
    for (int64_t i = 0; i < n; ++i)
        if (x[i] > 0.0) dx[i] += dy[i];
}

void bn_apply(double* y, double* xhat, const double* x,
              const double* s, const double* t,
              const double* gamma, const double* beta,
              int64_t rows, int64_t C) {
    for (int64_t r = 0; r < rows; ++r) {
        const int64_t off = r * C;
        for (int64_t c = 0; c < C; ++c) {
            const double xh = x[off + c] * s[c] + t[c];
            xhat[off + c] = xh;
            y[off + c] = xh * gamma[c] + beta[c];
        }
    }
}

void adam_step(double* p, const double* g, double* m, double* v, int64_t n,
               double lr, double b1, double b2, double eps,
               double bc1, double bc2) {
    const double om1 = 1.0 - b1;
    const double om2 = 1.0 - b2;
    for (int64_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + om1 * g[i];
        v[i] = b2 * v[i] + om2 * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t = {
        matmul_acc, conv3x3_acc, conv3x3_wgrad_acc, col_sum_acc,
        add,        sub,         mul,               axpy,
        relu,       relu_bwd_acc, bn_apply,         adam_step,
        "scalar",
    };
    return t;
}

}  // namespace stef::kernels
