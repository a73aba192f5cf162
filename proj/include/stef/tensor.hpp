#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "stef/common.hpp"

namespace stef {

class Tape;

namespace detail {

struct TensorData {
    Shape shape;
    // Values are shared so reshapes can alias storage; gradients are per
    // node, sized lazily by the tape.
    std::shared_ptr<std::vector<double>> values;
    std::vector<double> grad;
    int64_t node = -1;  // tape node id, -1 while off-tape
};

}  // namespace detail

/// Dense row-major tensor of 64-bit reals with shared-value copy
/// semantics. Gradients are attached per tensor and filled in by
/// Tape::backward.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor from(Shape shape, std::vector<double> values);
    static Tensor scalar(double value) { return from({1}, {value}); }

    bool defined() const { return d_ != nullptr; }
    const Shape& shape() const { return d_->shape; }
    int ndim() const { return static_cast<int>(d_->shape.size()); }
    int64_t dim(int axis) const { return d_->shape[static_cast<size_t>(axis)]; }
    int64_t size() const { return static_cast<int64_t>(d_->values->size()); }

    double* data() { return d_->values->data(); }
    const double* data() const { return d_->values->data(); }
    std::span<double> values() { return {d_->values->data(), d_->values->size()}; }
    std::span<const double> values() const { return {d_->values->data(), d_->values->size()}; }

    bool has_grad() const { return !d_->grad.empty(); }
    double* grad_data() { return d_->grad.data(); }
    std::span<const double> grad() const { return {d_->grad.data(), d_->grad.size()}; }

    /// Value of a single-element tensor.
    double item() const;

    /// Deep copy, detached from any tape.
    Tensor clone() const;

    /// Same data viewed under a different shape; shares storage, off-tape.
    /// Use ops::reshape when the view must participate in a gradient.
    Tensor reshaped(Shape shape) const;

    bool all_finite_values() const { return stef::all_finite(values()); }

    int64_t node_id() const { return d_->node; }

private:
    explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}
    std::shared_ptr<detail::TensorData> d_;
    friend class Tape;
};

/// Append-only record of forward operations. Backward replays the records
/// in reverse, accumulating into each participating tensor's grad buffer;
/// two backward passes over the same tape produce identical gradients.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    /// Releases membership so the same tensors (model parameters, inputs)
    /// can join a later tape. One tape at a time per tensor.
    ~Tape();

    /// Registers a tensor as a node (a leaf when it has no producing
    /// record). Idempotent.
    int64_t watch(const Tensor& t);

    /// Records one operation: inputs are auto-watched, `backward` runs
    /// during replay with all grad buffers allocated.
    void record(const char* op, std::initializer_list<const Tensor*> inputs,
                const Tensor& output, std::function<void()> backward);

    /// Populates gradients of everything on the tape with d(loss)/d(node).
    /// The loss must be a scalar living on this tape.
    void backward(const Tensor& loss);

    size_t num_records() const { return records_.size(); }
    size_t num_nodes() const { return nodes_.size(); }

private:
    struct Record {
        const char* op;
        std::vector<int64_t> inputs;
        int64_t output;
        std::function<void()> backward;
    };

    std::vector<Record> records_;
    std::vector<std::shared_ptr<detail::TensorData>> nodes_;
};

}  // namespace stef
