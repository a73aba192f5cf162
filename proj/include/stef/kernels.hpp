#pragma once

#include <cstdint>
#include <functional>

namespace stef::kernels {

// Inner arithmetic loops, provided as a scalar reference plus an AVX2
// variant selected at runtime. Every kernel fixes the accumulation order
// per output element (SIMD lanes run across output elements, never across
// a reduction), so all variants produce bit-identical results; the test
// suite asserts exact equality between them.

struct KernelTable {
    // c[m,n] += a[m,k]*b[k,n] for rows m in [m0, m1); k ascending per element.
    void (*matmul_acc)(double* c, const double* a, const double* b,
                       int64_t m0, int64_t m1, int64_t K, int64_t N);

    // 3x3 same-padding cross-correlation, NHWC-style layout with spatial
    // dims (W, H) and channels last.
    // out[i,w,h,co] += sum_{kw,kh,ci} in[i,w+kw-1,h+kh-1,ci] * krn[kw,kh,ci,co]
    // for images i in [img0, img1); out-of-range taps are skipped (zero pad).
    void (*conv3x3_acc)(double* out, const double* in, const double* krn,
                        int64_t img0, int64_t img1, int64_t W, int64_t H,
                        int64_t cin, int64_t cout);

    // dkrn[kw,kh,ci,co] += sum_{i,w,h} in[i,w+kw-1,h+kh-1,ci] * dout[i,w,h,co]
    void (*conv3x3_wgrad_acc)(double* dkrn, const double* in, const double* dout,
                              int64_t n_img, int64_t W, int64_t H,
                              int64_t cin, int64_t cout);

    // acc[c] += sum_r x[r,c]; rows ascending per column.
    void (*col_sum_acc)(double* acc, const double* x, int64_t rows, int64_t cols);

    void (*add)(double* out, const double* a, const double* b, int64_t n);
    void (*sub)(double* out, const double* a, const double* b, int64_t n);
    void (*mul)(double* out, const double* a, const double* b, int64_t n);
    void (*axpy)(double* y, double alpha, const double* x, int64_t n);  // y += alpha*x
    void (*relu)(double* out, const double* x, int64_t n);
    void (*relu_bwd_acc)(double* dx, const double* x, const double* dy, int64_t n);

    // Two chained per-channel affines over a [rows, C] block:
    //   xhat[r,c] = x[r,c]*s[c] + t[c];  y[r,c] = xhat[r,c]*gamma[c] + beta[c]
    void (*bn_apply)(double* y, double* xhat, const double* x,
                     const double* s, const double* t,
                     const double* gamma, const double* beta,
                     int64_t rows, int64_t C);

    // One Adam step with precomputed bias corrections bc1 = 1-b1^t, bc2 = 1-b2^t.
    void (*adam_step)(double* p, const double* g, double* m, double* v, int64_t n,
                      double lr, double b1, double b2, double eps,
                      double bc1, double bc2);

    const char* name;
};

enum class Isa { scalar, avx2 };

bool avx2_available();

/// Table for an explicit ISA (throws if unavailable). Used by the
/// equivalence tests.
const KernelTable& table(Isa isa);

/// The table picked at startup: best ISA the CPU supports, overridable
/// with STEF_KERNEL_ISA=scalar|avx2.
const KernelTable& active();

/// Splits [0, n) into contiguous ranges and runs fn on them, possibly on
/// worker threads. Ranges are disjoint and each output row is written by
/// exactly one invocation, so results do not depend on the thread count
/// (STEF_THREADS overrides the default).
void parallel_rows(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

int thread_count();

}  // namespace stef::kernels
