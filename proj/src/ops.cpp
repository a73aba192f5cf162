#include "stef/ops.hpp"

#include <cmath>
#include <cstring>

#include "stef/kernels.hpp"

namespace stef {

BatchNormParams BatchNormParams::make(int64_t channels) {
    BatchNormParams bn;
    bn.gamma = Tensor::full({channels}, 1.0);
    bn.beta = Tensor::zeros({channels});
    bn.running_mean = Tensor::zeros({channels});
    bn.running_var = Tensor::full({channels}, 1.0);
    return bn;
}

BatchNormParams BatchNormParams::clone() const {
    BatchNormParams bn;
    bn.gamma = gamma.clone();
    bn.beta = beta.clone();
    bn.running_mean = running_mean.clone();
    bn.running_var = running_var.clone();
    bn.batches_seen = batches_seen;
    return bn;
}

namespace ops {
namespace {

const kernels::KernelTable& K() { return kernels::active(); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
}

std::vector<double> transpose(const double* a, int64_t rows, int64_t cols) {
    std::vector<double> t(static_cast<size_t>(rows * cols));
    for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c) t[static_cast<size_t>(c * rows + r)] = a[r * cols + c];
    return t;
}

Tensor binary_op(const char* name, const Tensor& a, const Tensor& b,
                 void (*fwd)(double*, const double*, const double*, int64_t)) {
    require_same_shape(name, a, b);
    Tensor out = Tensor::zeros(a.shape());
    fwd(out.data(), a.data(), b.data(), a.size());
    return out;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    Tensor out = binary_op("add", a, b, K().add);
    Tensor ac = a, bc = b, oc = out;
    tape.record("add", {&a, &b}, out, [ac, bc, oc]() mutable {
        K().axpy(ac.grad_data(), 1.0, oc.grad().data(), ac.size());
        K().axpy(bc.grad_data(), 1.0, oc.grad().data(), bc.size());
    });
    return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
    Tensor out = binary_op("sub", a, b, K().sub);
    Tensor ac = a, bc = b, oc = out;
    tape.record("sub", {&a, &b}, out, [ac, bc, oc]() mutable {
        K().axpy(ac.grad_data(), 1.0, oc.grad().data(), ac.size());
        K().axpy(bc.grad_data(), -1.0, oc.grad().data(), bc.size());
    });
    return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    Tensor out = binary_op("mul", a, b, K().mul);
    Tensor ac = a, bc = b, oc = out;
    tape.record("mul", {&a, &b}, out, [ac, bc, oc]() mutable {
        const double* dy = oc.grad().data();
        const int64_t n = ac.size();
        double* da = ac.grad_data();
        double* db = bc.grad_data();
        const double* av = ac.data();
        const double* bv = bc.data();
        for (int64_t i = 0; i < n; ++i) {
            da[i] += dy[i] * bv[i];
            db[i] += dy[i] * av[i];
        }
    });
    return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    K().relu(out.data(), x.data(), x.size());
    Tensor xc = x, oc = out;
    tape.record("relu", {&x}, out, [xc, oc]() mutable {
        K().relu_bwd_acc(xc.grad_data(), xc.data(), oc.grad().data(), xc.size());
    });
    return out;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t i = 0; i < x.size(); ++i) {
        const double v = xv[i];
        if (v >= 0) {
            ov[i] = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            ov[i] = e / (1.0 + e);
        }
    }
    Tensor xc = x, oc = out;
    tape.record("sigmoid", {&x}, out, [xc, oc]() mutable {
        const double* y = oc.data();
        const double* dy = oc.grad().data();
        double* dx = xc.grad_data();
        for (int64_t i = 0; i < xc.size(); ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
    });
    return out;
}

Tensor tanh(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t i = 0; i < x.size(); ++i) ov[i] = std::tanh(xv[i]);
    Tensor xc = x, oc = out;
    tape.record("tanh", {&x}, out, [xc, oc]() mutable {
        const double* y = oc.data();
        const double* dy = oc.grad().data();
        double* dx = xc.grad_data();
        for (int64_t i = 0; i < xc.size(); ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
    });
    return out;
}

Tensor abs(Tape& tape, const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const double* xv = x.data();
    double* ov = out.data();
    for (int64_t i = 0; i < x.size(); ++i) ov[i] = std::fabs(xv[i]);
    Tensor xc = x, oc = out;
    tape.record("abs", {&x}, out, [xc, oc]() mutable {
        const double* xv2 = xc.data();
        const double* dy = oc.grad().data();
        double* dx = xc.grad_data();
        for (int64_t i = 0; i < xc.size(); ++i) {
            if (xv2[i] > 0)
                dx[i] += dy[i];
            else if (xv2[i] < 0)
                dx[i] -= dy[i];
            // sign(0) = 0: no contribution
        }
    });
    return out;
}

Tensor sum_all(Tape& tape, const Tensor& x) {
    double sum = 0.0;
    for (double v : x.values()) sum += v;
    Tensor out = Tensor::scalar(sum);
    Tensor xc = x, oc = out;
    tape.record("sum_all", {&x}, out, [xc, oc]() mutable {
        const double g = oc.grad()[0];
        double* dx = xc.grad_data();
        for (int64_t i = 0; i < xc.size(); ++i) dx[i] += g;
    });
    return out;
}

Tensor mean_all(Tape& tape, const Tensor& x) {
    if (x.size() == 0) throw std::invalid_argument("mean_all: empty tensor");
    double sum = 0.0;
    for (double v : x.values()) sum += v;
    const double n = static_cast<double>(x.size());
    Tensor out = Tensor::scalar(sum / n);
    Tensor xc = x, oc = out;
    tape.record("mean_all", {&x}, out, [xc, oc, n]() mutable {
        const double g = oc.grad()[0] / n;
        double* dx = xc.grad_data();
        for (int64_t i = 0; i < xc.size(); ++i) dx[i] += g;
    });
    return out;
}

namespace {

Tensor affine_impl(Tape& tape, const char* name, const Tensor& x, const Tensor& w,
                   const Tensor* bias) {
    if (w.ndim() != 2)
        throw std::invalid_argument(std::string(name) + ": weights must be 2-d, got " +
                                    shape_str(w.shape()));
    if (x.ndim() < 1 || x.dim(x.ndim() - 1) != w.dim(0))
        throw std::invalid_argument(std::string(name) + ": last input axis " +
                                    shape_str(x.shape()) + " does not match weights in_dim " +
                                    std::to_string(w.dim(0)));
    const int64_t in = w.dim(0);
    const int64_t out_dim = w.dim(1);
    if (bias && (bias->ndim() != 1 || bias->dim(0) != out_dim))
        throw std::invalid_argument(std::string(name) + ": bias must have shape [" +
                                    std::to_string(out_dim) + "], got " +
                                    shape_str(bias->shape()));
    const int64_t rows = x.size() / in;

    Shape out_shape(x.shape().begin(), x.shape().end() - 1);
    out_shape.push_back(out_dim);
    Tensor out = Tensor::zeros(out_shape);
    if (bias) {
        double* ov = out.data();
        for (int64_t r = 0; r < rows; ++r)
            std::memcpy(ov + r * out_dim, bias->data(), sizeof(double) * static_cast<size_t>(out_dim));
    }
    kernels::parallel_rows(rows, [&](int64_t m0, int64_t m1) {
        K().matmul_acc(out.data(), x.data(), w.data(), m0, m1, in, out_dim);
    });

    Tensor xc = x, wc = w, oc = out;
    Tensor bc = bias ? *bias : Tensor();
    auto bwd = [xc, wc, bc, oc, rows, in, out_dim]() mutable {
        const double* dy = oc.grad().data();
        // d_bias[o] += sum_r dy[r,o]
        if (bc.defined()) K().col_sum_acc(bc.grad_data(), dy, rows, out_dim);
        // d_w[i,o] += sum_r x[r,i] dy[r,o]
        const std::vector<double> xt = transpose(xc.data(), rows, in);
        kernels::parallel_rows(in, [&](int64_t m0, int64_t m1) {
            K().matmul_acc(wc.grad_data(), xt.data(), dy, m0, m1, rows, out_dim);
        });
        // d_x[r,i] += sum_o dy[r,o] w[i,o]
        const std::vector<double> wt = transpose(wc.data(), in, out_dim);
        kernels::parallel_rows(rows, [&](int64_t m0, int64_t m1) {
            K().matmul_acc(xc.grad_data(), dy, wt.data(), m0, m1, out_dim, in);
        });
    };
    if (bias)
        tape.record(name, {&x, &w, bias}, out, std::move(bwd));
    else
        tape.record(name, {&x, &w}, out, std::move(bwd));
    return out;
}

}  // namespace

Tensor dense_affine(Tape& tape, const Tensor& x, const Tensor& w, const Tensor& b) {
    return affine_impl(tape, "dense_affine", x, w, &b);
}

Tensor matmul(Tape& tape, const Tensor& x, const Tensor& w) {
    return affine_impl(tape, "matmul", x, w, nullptr);
}

Tensor conv2d_same(Tape& tape, const Tensor& input, const Tensor& kernels_t, const Tensor& bias) {
    if (input.ndim() != 4)
        throw std::invalid_argument("conv2d_same: input must be [batch, W, H, C], got " +
                                    shape_str(input.shape()));
    if (kernels_t.ndim() != 4 || kernels_t.dim(0) != 3 || kernels_t.dim(1) != 3)
        throw std::invalid_argument("conv2d_same: kernels must be [3, 3, C_in, C_out], got " +
                                    shape_str(kernels_t.shape()));
    if (kernels_t.dim(2) != input.dim(3))
        throw std::invalid_argument(
            "conv2d_same: input channel axis (size " + std::to_string(input.dim(3)) +
            ") does not match kernel C_in axis (size " + std::to_string(kernels_t.dim(2)) + ")");
    const int64_t B = input.dim(0), W = input.dim(1), H = input.dim(2);
    const int64_t cin = input.dim(3), cout = kernels_t.dim(3);
    if (bias.ndim() != 1 || bias.dim(0) != cout)
        throw std::invalid_argument("conv2d_same: bias axis must have size " +
                                    std::to_string(cout) + ", got " + shape_str(bias.shape()));

    Tensor out = Tensor::zeros({B, W, H, cout});
    double* ov = out.data();
    const int64_t pixels = B * W * H;
    for (int64_t p = 0; p < pixels; ++p)
        std::memcpy(ov + p * cout, bias.data(), sizeof(double) * static_cast<size_t>(cout));
    kernels::parallel_rows(B, [&](int64_t i0, int64_t i1) {
        K().conv3x3_acc(out.data(), input.data(), kernels_t.data(), i0, i1, W, H, cin, cout);
    });

    Tensor xc = input, kc = kernels_t, bc = bias, oc = out;
    tape.record("conv2d_same", {&input, &kernels_t, &bias}, out,
                [xc, kc, bc, oc, B, W, H, cin, cout]() mutable {
                    const double* dy = oc.grad().data();
                    K().col_sum_acc(bc.grad_data(), dy, B * W * H, cout);
                    K().conv3x3_wgrad_acc(kc.grad_data(), xc.data(), dy, B, W, H, cin, cout);
                    // d_input is a 3x3 correlation of dy with the kernel
                    // flipped in both spatial axes and transposed in channels.
                    std::vector<double> kt(static_cast<size_t>(9 * cin * cout));
                    const double* kv = kc.data();
                    for (int64_t kw = 0; kw < 3; ++kw)
                        for (int64_t kh = 0; kh < 3; ++kh)
                            for (int64_t ci = 0; ci < cin; ++ci)
                                for (int64_t co = 0; co < cout; ++co)
                                    kt[static_cast<size_t>(((kw * 3 + kh) * cout + co) * cin + ci)] =
                                        kv[(((2 - kw) * 3 + (2 - kh)) * cin + ci) * cout + co];
                    kernels::parallel_rows(B, [&](int64_t i0, int64_t i1) {
                        K().conv3x3_acc(xc.grad_data(), dy, kt.data(), i0, i1, W, H, cout, cin);
                    });
                });
    return out;
}

Tensor batch_norm(Tape& tape, const Tensor& x, BatchNormParams& bn, Mode mode, double eps,
                  double momentum) {
    if (x.ndim() < 2)
        throw std::invalid_argument("batch_norm: input needs a channel axis plus at least one "
                                    "batch axis, got " + shape_str(x.shape()));
    const int64_t C = x.dim(x.ndim() - 1);
    if (bn.gamma.size() != C || bn.beta.size() != C)
        throw std::invalid_argument("batch_norm: channel axis has size " + std::to_string(C) +
                                    " but gamma/beta have size " + std::to_string(bn.gamma.size()));
    const int64_t rows = x.size() / C;

    std::vector<double> mean(static_cast<size_t>(C), 0.0);
    std::vector<double> inv_std(static_cast<size_t>(C), 0.0);

    if (mode == Mode::train) {
        if (rows < 2)
            throw std::invalid_argument(
                "batch_norm: train mode needs at least 2 elements per channel, got " +
                std::to_string(rows));
        const double* xv = x.data();
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < C; ++c) mean[static_cast<size_t>(c)] += xv[r * C + c];
        for (int64_t c = 0; c < C; ++c) mean[static_cast<size_t>(c)] /= static_cast<double>(rows);
        std::vector<double> var(static_cast<size_t>(C), 0.0);
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t c = 0; c < C; ++c) {
                const double d = xv[r * C + c] - mean[static_cast<size_t>(c)];
                var[static_cast<size_t>(c)] += d * d;
            }
        for (int64_t c = 0; c < C; ++c) var[static_cast<size_t>(c)] /= static_cast<double>(rows);
        for (int64_t c = 0; c < C; ++c)
            inv_std[static_cast<size_t>(c)] = 1.0 / std::sqrt(var[static_cast<size_t>(c)] + eps);

        double* rm = bn.running_mean.data();
        double* rv = bn.running_var.data();
        for (int64_t c = 0; c < C; ++c) {
            rm[c] = momentum * rm[c] + (1.0 - momentum) * mean[static_cast<size_t>(c)];
            rv[c] = momentum * rv[c] + (1.0 - momentum) * var[static_cast<size_t>(c)];
        }
        bn.batches_seen++;
    } else {
        if (bn.batches_seen < 1)
            throw std::invalid_argument(
                "batch_norm: infer mode requested but running statistics are unpopulated");
        const double* rm = bn.running_mean.data();
        const double* rv = bn.running_var.data();
        for (int64_t c = 0; c < C; ++c) {
            mean[static_cast<size_t>(c)] = rm[c];
            inv_std[static_cast<size_t>(c)] = 1.0 / std::sqrt(rv[c] + eps);
        }
    }

    std::vector<double> scale(static_cast<size_t>(C)), shift(static_cast<size_t>(C));
    for (int64_t c = 0; c < C; ++c) {
        scale[static_cast<size_t>(c)] = inv_std[static_cast<size_t>(c)];
        shift[static_cast<size_t>(c)] = -mean[static_cast<size_t>(c)] * inv_std[static_cast<size_t>(c)];
    }
    Tensor out = Tensor::zeros(x.shape());
    Tensor xhat = Tensor::zeros(x.shape());
    K().bn_apply(out.data(), xhat.data(), x.data(), scale.data(), shift.data(), bn.gamma.data(),
                 bn.beta.data(), rows, C);

    Tensor xc = x, gc = bn.gamma, bc = bn.beta, oc = out, xh = xhat;
    tape.record("batch_norm", {&x, &bn.gamma, &bn.beta}, out,
                [xc, gc, bc, oc, xh, inv_std = std::move(inv_std), mode, rows, C]() mutable {
                    const double* dy = oc.grad().data();
                    const double* xhv = xh.data();
                    std::vector<double> sum_dy(static_cast<size_t>(C), 0.0);
                    std::vector<double> sum_dy_xhat(static_cast<size_t>(C), 0.0);
                    for (int64_t r = 0; r < rows; ++r)
                        for (int64_t c = 0; c < C; ++c) {
                            sum_dy[static_cast<size_t>(c)] += dy[r * C + c];
                            sum_dy_xhat[static_cast<size_t>(c)] += dy[r * C + c] * xhv[r * C + c];
                        }
                    double* dgamma = gc.grad_data();
                    double* dbeta = bc.grad_data();
                    for (int64_t c = 0; c < C; ++c) {
                        dgamma[c] += sum_dy_xhat[static_cast<size_t>(c)];
                        dbeta[c] += sum_dy[static_cast<size_t>(c)];
                    }
                    double* dx = xc.grad_data();
                    const double* gv = gc.data();
                    if (mode == Mode::train) {
                        const double n = static_cast<double>(rows);
                        for (int64_t c = 0; c < C; ++c) {
                            const double coef = gv[c] * inv_std[static_cast<size_t>(c)] / n;
                            const double sd = sum_dy[static_cast<size_t>(c)];
                            const double sdx = sum_dy_xhat[static_cast<size_t>(c)];
                            for (int64_t r = 0; r < rows; ++r) {
                                const int64_t i = r * C + c;
                                dx[i] += coef * (n * dy[i] - sd - xhv[i] * sdx);
                            }
                        }
                    } else {
                        for (int64_t r = 0; r < rows; ++r)
                            for (int64_t c = 0; c < C; ++c) {
                                const int64_t i = r * C + c;
                                dx[i] += dy[i] * gv[c] * inv_std[static_cast<size_t>(c)];
                            }
                    }
                });
    return out;
}

Tensor concat_last_axis(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.ndim() != b.ndim())
        throw std::invalid_argument("concat_last_axis: rank mismatch " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
    for (int i = 0; i + 1 < a.ndim(); ++i)
        if (a.dim(i) != b.dim(i))
            throw std::invalid_argument("concat_last_axis: axis " + std::to_string(i) +
                                        " differs: " + shape_str(a.shape()) + " vs " +
                                        shape_str(b.shape()));
    const int64_t P = a.dim(a.ndim() - 1);
    const int64_t Q = b.dim(b.ndim() - 1);
    const int64_t rows = P > 0 ? a.size() / P : b.size() / std::max<int64_t>(Q, 1);

    Shape out_shape = a.shape();
    out_shape.back() = P + Q;
    Tensor out = Tensor::zeros(out_shape);
    double* ov = out.data();
    for (int64_t r = 0; r < rows; ++r) {
        std::memcpy(ov + r * (P + Q), a.data() + r * P, sizeof(double) * static_cast<size_t>(P));
        std::memcpy(ov + r * (P + Q) + P, b.data() + r * Q, sizeof(double) * static_cast<size_t>(Q));
    }
    Tensor ac = a, bc = b, oc = out;
    tape.record("concat_last_axis", {&a, &b}, out, [ac, bc, oc, rows, P, Q]() mutable {
        const double* dy = oc.grad().data();
        double* da = ac.grad_data();
        double* db = bc.grad_data();
        for (int64_t r = 0; r < rows; ++r) {
            for (int64_t j = 0; j < P; ++j) da[r * P + j] += dy[r * (P + Q) + j];
            for (int64_t j = 0; j < Q; ++j) db[r * Q + j] += dy[r * (P + Q) + P + j];
        }
    });
    return out;
}

Tensor slice_last_axis(Tape& tape, const Tensor& x, int64_t start, int64_t len) {
    const int64_t C = x.dim(x.ndim() - 1);
    if (start < 0 || len < 0 || start + len > C)
        throw std::invalid_argument("slice_last_axis: range [" + std::to_string(start) + ", " +
                                    std::to_string(start + len) + ") out of axis size " +
                                    std::to_string(C));
    const int64_t rows = x.size() / C;
    Shape out_shape = x.shape();
    out_shape.back() = len;
    Tensor out = Tensor::zeros(out_shape);
    double* ov = out.data();
    const double* xv = x.data();
    for (int64_t r = 0; r < rows; ++r)
        std::memcpy(ov + r * len, xv + r * C + start, sizeof(double) * static_cast<size_t>(len));
    Tensor xc = x, oc = out;
    tape.record("slice_last_axis", {&x}, out, [xc, oc, rows, C, start, len]() mutable {
        const double* dy = oc.grad().data();
        double* dx = xc.grad_data();
        for (int64_t r = 0; r < rows; ++r)
            for (int64_t j = 0; j < len; ++j) dx[r * C + start + j] += dy[r * len + j];
    });
    return out;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
    Tensor out = x.reshaped(std::move(shape));
    Tensor xc = x, oc = out;
    tape.record("reshape", {&x}, out, [xc, oc]() mutable {
        K().axpy(xc.grad_data(), 1.0, oc.grad().data(), xc.size());
    });
    return out;
}

Tensor select_axis1(Tape& tape, const Tensor& x, int64_t at) {
    if (x.ndim() < 2)
        throw std::invalid_argument("select_axis1: need at least 2 axes, got " +
                                    shape_str(x.shape()));
    const int64_t d0 = x.dim(0);
    const int64_t d1 = x.dim(1);
    if (at < 0 || at >= d1)
        throw std::invalid_argument("select_axis1: index " + std::to_string(at) +
                                    " out of axis-1 size " + std::to_string(d1));
    int64_t block = 1;
    for (int i = 2; i < x.ndim(); ++i) block *= x.dim(i);

    Shape out_shape;
    out_shape.push_back(d0);
    for (int i = 2; i < x.ndim(); ++i) out_shape.push_back(x.dim(i));
    Tensor out = Tensor::zeros(out_shape);
    double* ov = out.data();
    const double* xv = x.data();
    for (int64_t r = 0; r < d0; ++r)
        std::memcpy(ov + r * block, xv + (r * d1 + at) * block,
                    sizeof(double) * static_cast<size_t>(block));
    Tensor xc = x, oc = out;
    tape.record("select_axis1", {&x}, out, [xc, oc, d0, d1, at, block]() mutable {
        const double* dy = oc.grad().data();
        double* dx = xc.grad_data();
        for (int64_t r = 0; r < d0; ++r)
            for (int64_t j = 0; j < block; ++j) dx[(r * d1 + at) * block + j] += dy[r * block + j];
    });
    return out;
}

std::pair<Tensor, Tensor> lstm_step(Tape& tape, const Tensor& x, const Tensor& h_prev,
                                    const Tensor& c_prev, const LstmParams& params) {
    const int64_t u = params.units();
    if (x.dim(x.ndim() - 1) != params.input_dim())
        throw std::invalid_argument("lstm_step: input axis " + shape_str(x.shape()) +
                                    " does not match gate weights in_dim " +
                                    std::to_string(params.input_dim()));
    if (h_prev.dim(h_prev.ndim() - 1) != u || c_prev.dim(c_prev.ndim() - 1) != u)
        throw std::invalid_argument("lstm_step: state axes " + shape_str(h_prev.shape()) + "/" +
                                    shape_str(c_prev.shape()) + " do not match units " +
                                    std::to_string(u));
    if (params.w_ih.dim(1) != 4 * u || params.bias.size() != 4 * u)
        throw std::invalid_argument("lstm_step: gate parameter axes disagree on units");

    Tensor gates = add(tape, dense_affine(tape, x, params.w_ih, params.bias),
                       matmul(tape, h_prev, params.w_hh));
    Tensor gi = sigmoid(tape, slice_last_axis(tape, gates, 0, u));
    Tensor gf = sigmoid(tape, slice_last_axis(tape, gates, u, u));
    Tensor gg = tanh(tape, slice_last_axis(tape, gates, 2 * u, u));
    Tensor go = sigmoid(tape, slice_last_axis(tape, gates, 3 * u, u));
    Tensor c_t = add(tape, mul(tape, gf, c_prev), mul(tape, gi, gg));
    Tensor h_t = mul(tape, go, tanh(tape, c_t));
    return {h_t, c_t};
}

}  // namespace ops
}  // namespace stef
