#include "kernels_internal.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

// AVX2 kernels. Lanes run across output elements only; per-element
// accumulation order matches kernels_scalar.cpp exactly, and mul/add are
// issued separately (no fma), so results are bit-identical to the scalar
// reference. Scalar tails rely on -ffp-contract=off for the same reason.

namespace stef::kernels {
namespace {

void matmul_acc(double* c, const double* a, const double* b,
                int64_t m0, int64_t m1, int64_t K, int64_t N) {
    for (int64_t m = m0; m < m1; ++m) {
        double* crow = c + m * N;
        const double* arow = a + m * K;
        int64_t n = 0;
        for (; n + 16 <= N; n += 16) {
            __m256d acc0 = _mm256_loadu_pd(crow + n);
            __m256d acc1 = _mm256_loadu_pd(crow + n + 4);
            __m256d acc2 = _mm256_loadu_pd(crow + n + 8);
            __m256d acc3 = _mm256_loadu_pd(crow + n + 12);
            for (int64_t k = 0; k < K; ++k) {
                const __m256d av = _mm256_set1_pd(arow[k]);
                const double* brow = b + k * N + n;
                acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(av, _mm256_loadu_pd(brow)));
                acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 4)));
                acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 8)));
                acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(av, _mm256_loadu_pd(brow + 12)));
            }
            _mm256_storeu_pd(crow + n, acc0);
            _mm256_storeu_pd(crow + n + 4, acc1);
            _mm256_storeu_pd(crow + n + 8, acc2);
            _mm256_storeu_pd(crow + n + 12, acc3);
        }
        for (; n + 4 <= N; n += 4) {
            __m256d acc = _mm256_loadu_pd(crow + n);
            for (int64_t k = 0; k < K; ++k) {
                const __m256d av = _mm256_set1_pd(arow[k]);
                acc = _mm256_add_pd(acc, _mm256_mul_pd(av, _mm256_loadu_pd(b + k * N + n)));
            }
            _mm256_storeu_pd(crow + n, acc);
        }
        for (; n < N; ++n) {
            double sum = crow[n];
            for (int64_t k = 0; k < K; ++k) sum += arow[k] * b[k * N + n];
            crow[n] = sum;
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
                int64_t co = 0;
                for (; co + 16 <= cout; co += 16) {
                    __m256d acc0 = _mm256_loadu_pd(orow + co);
                    __m256d acc1 = _mm256_loadu_pd(orow + co + 4);
                    __m256d acc2 = _mm256_loadu_pd(orow + co + 8);
                    __m256d acc3 = _mm256_loadu_pd(orow + co + 12);
                    for (int64_t kw = 0; kw < 3; ++kw) {
                        const int64_t iw = w + kw - 1;
                        if (iw < 0 || iw >= W) continue;
                        for (int64_t kh = 0; kh < 3; ++kh) {
                            const int64_t ih = h + kh - 1;
                            if (ih < 0 || ih >= H) continue;
                            const double* irow = ib + (iw * H + ih) * cin;
                            const double* kbase = krn + (kw * 3 + kh) * cin * cout + co;
                            for (int64_t ci = 0; ci < cin; ++ci) {
                                const __m256d x = _mm256_set1_pd(irow[ci]);
                                const double* krow = kbase + ci * cout;
                                acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(x, _mm256_loadu_pd(krow)));
                                acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(x, _mm256_loadu_pd(krow + 4)));
                                acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(x, _mm256_loadu_pd(krow + 8)));
                                acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(x, _mm256_loadu_pd(krow + 12)));
                            }
                        }
                    }
                    _mm256_storeu_pd(orow + co, acc0);
                    _mm256_storeu_pd(orow + co + 4, acc1);
                    _mm256_storeu_pd(orow + co + 8, acc2);
                    _mm256_storeu_pd(orow + co + 12, acc3);
                }
                for (; co + 4 <= cout; co += 4) {
                    __m256d acc = _mm256_loadu_pd(orow + co);
                    for (int64_t kw = 0; kw < 3; ++kw) {
                        const int64_t iw = w + kw - 1;
                        if (iw < 0 || iw >= W) continue;
                        for (int64_t kh = 0; kh < 3; ++kh) {
                            const int64_t ih = h + kh - 1;
                            if (ih < 0 || ih >= H) continue;
                            const double* irow = ib + (iw * H + ih) * cin;
                            const double* kbase = krn + (kw * 3 + kh) * cin * cout + co;
                            for (int64_t ci = 0; ci < cin; ++ci) {
                                const __m256d x = _mm256_set1_pd(irow[ci]);
                                acc = _mm256_add_pd(acc, _mm256_mul_pd(x, _mm256_loadu_pd(kbase + ci * cout)));
                            }
                        }
                    }
                    _mm256_storeu_pd(orow + co, acc);
                }
                for (; co < cout; ++co) {
                    double sum = orow[co];
                    for (int64_t kw = 0; kw < 3; ++kw) {
                        const int64_t iw = w + kw - 1;
                        if (iw < 0 || iw >= W) continue;
                        for (int64_t kh = 0; kh < 3; ++kh) {
                            const int64_t ih = h + kh - 1;
                            if (ih < 0 || ih >= H) continue;
                            const double* irow = ib + (iw * H + ih) * cin;
                            const double* kbase = krn + (kw * 3 + kh) * cin * cout + co;
                            for (int64_t ci = 0; ci < cin; ++ci) sum += irow[ci] * kbase[ci * cout];
                        }
                    }
                    orow[co] = sum;
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
                            const __m256d x = _mm256_set1_pd(irow[ci]);
                            double* krow = kbase + ci * cout;
                            int64_t co = 0;
                            for (; co + 4 <= cout; co += 4) {
                                const __m256d prod = _mm256_mul_pd(x, _mm256_loadu_pd(drow + co));
                                _mm256_storeu_pd(krow + co,
                                                 _mm256_add_pd(_mm256_loadu_pd(krow + co), prod));
                            }
                            for (; co < cout; ++co) krow[co] += irow[ci] * drow[co];
                        }
                    }
                }
            }
    }
}

void col_sum_acc(double* acc, const double* x, int64_t rows, int64_t cols) {
    for (int64_t r = 0; r < rows; ++r) {
        const double* row = x + r * cols;
        int64_t c = 0;
        for (; c + 4 <= cols; c += 4)
            _mm256_storeu_pd(acc + c,
                             _mm256_add_pd(_mm256_loadu_pd(acc + c), _mm256_loadu_pd(row + c)));
        for (; c < cols; ++c) acc[c] += row[c];
    }
}

void add(double* out, const double* a, const double* b, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(double* out, const double* a, const double* b, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(double* out, const double* a, const double* b, int64_t n) {
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy(double* y, double alpha, const double* x, int64_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void relu(double* out, const double* x, int64_t n) {
    const __m256d zero = _mm256_setzero_pd();
    int64_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc(double* dx, const double* x, const double* dy, int64_t n) {
    const __m256d zero = _mm256_setzero_pd();
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
        const __m256d cur = _mm256_loadu_pd(dx + i);
        const __m256d sum = _mm256_add_pd(cur, _mm256_loadu_pd(dy + i));
        // blend keeps the original bits where x <= 0 (a plain +0.0 would
        // flip the sign of a -0.0 gradient)
        _mm256_storeu_pd(dx + i, _mm256_blendv_pd(cur, sum, mask));
    }
    for (; i < n; ++i)
        if (x[i] > 0.0) dx[i] += dy[i];
}

void bn_apply(double* y, double* xhat, const double* x,
              const double* s, const double* t,
              const double* gamma, const double* beta,
              int64_t rows, int64_t C) {
    for (int64_t r = 0; r < rows; ++r) {
        const int64_t off = r * C;
        int64_t c = 0;
        for (; c + 4 <= C; c += 4) {
            const __m256d xh = _mm256_add_pd(
                _mm256_mul_pd(_mm256_loadu_pd(x + off + c), _mm256_loadu_pd(s + c)),
                _mm256_loadu_pd(t + c));
            _mm256_storeu_pd(xhat + off + c, xh);
            _mm256_storeu_pd(y + off + c,
                             _mm256_add_pd(_mm256_mul_pd(xh, _mm256_loadu_pd(gamma + c)),
                                           _mm256_loadu_pd(beta + c)));
        }
        for (; c < C; ++c) {
            const double xh = x[off + c] * s[c] + t[c];
            xhat[off + c] = xh;
            y[off + c] = xh * gamma[c] + beta[c];
        }
    }
}

void adam_step(double* p, const double* g, double* m, double* v, int64_t n,
               double lr, double b1, double b2, double eps,
               double bc1, double bc2) {
    const __m256d b1v = _mm256_set1_pd(b1);
    const __m256d b2v = _mm256_set1_pd(b2);
    const __m256d om1 = _mm256_set1_pd(1.0 - b1);
    const __m256d om2 = _mm256_set1_pd(1.0 - b2);
    const __m256d bc1v = _mm256_set1_pd(bc1);
    const __m256d bc2v = _mm256_set1_pd(bc2);
    const __m256d lrv = _mm256_set1_pd(lr);
    const __m256d epsv = _mm256_set1_pd(eps);
    int64_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d gv = _mm256_loadu_pd(g + i);
        const __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1v, _mm256_loadu_pd(m + i)),
                                         _mm256_mul_pd(om1, gv));
        const __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2v, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(om2, _mm256_mul_pd(gv, gv)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        const __m256d mhat = _mm256_div_pd(mv, bc1v);
        const __m256d vhat = _mm256_div_pd(vv, bc2v);
        const __m256d den = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
        const __m256d step = _mm256_mul_pd(lrv, _mm256_div_pd(mhat, den));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    const double som1 = 1.0 - b1;
    const double som2 = 1.0 - b2;
    for (; i < n; ++i) {
        m[i] = b1 * m[i] + som1 * g[i];
        v[i] = b2 * v[i] + som2 * (g[i] * g[i]);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable t = {
        matmul_acc, conv3x3_acc, conv3x3_wgrad_acc, col_sum_acc,
        add,        sub,         mul,               axpy,
        relu,       relu_bwd_acc, bn_apply,         adam_step,
        "avx2",
    };
    return t;
}

}  // namespace stef::kernels

#endif  // x86_64
