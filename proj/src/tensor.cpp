#include "stef/tensor.hpp"

#include <cstring>

namespace stef {

Tensor Tensor::zeros(Shape shape) {
    auto d = std::make_shared<detail::TensorData>();
    const int64_t n = shape_size(shape);
    d->shape = std::move(shape);
    d->values = std::make_shared<std::vector<double>>(static_cast<size_t>(n), 0.0);
    return Tensor(std::move(d));
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t = zeros(std::move(shape));
    for (double& x : *t.d_->values) x = value;
    return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
    if (shape_size(shape) != static_cast<int64_t>(values.size()))
        throw std::invalid_argument("Tensor::from: shape " + shape_str(shape) + " needs " +
                                    std::to_string(shape_size(shape)) + " values, got " +
                                    std::to_string(values.size()));
    auto d = std::make_shared<detail::TensorData>();
    d->shape = std::move(shape);
    d->values = std::make_shared<std::vector<double>>(std::move(values));
    return Tensor(std::move(d));
}

double Tensor::item() const {
    if (size() != 1)
        throw std::invalid_argument("Tensor::item: tensor has " + std::to_string(size()) +
                                    " elements, expected 1");
    return (*d_->values)[0];
}

Tensor Tensor::clone() const {
    auto d = std::make_shared<detail::TensorData>();
    d->shape = d_->shape;
    d->values = std::make_shared<std::vector<double>>(*d_->values);
    return Tensor(std::move(d));
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_size(shape) != size())
        throw std::invalid_argument("Tensor::reshaped: cannot view " + shape_str(d_->shape) +
                                    " as " + shape_str(shape));
    auto d = std::make_shared<detail::TensorData>();
    d->shape = std::move(shape);
    d->values = d_->values;
    return Tensor(std::move(d));
}

Tape::~Tape() {
    for (auto& n : nodes_) n->node = -1;
}

int64_t Tape::watch(const Tensor& t) {
    if (!t.defined()) throw std::invalid_argument("Tape::watch: undefined tensor");
    if (t.d_->node >= 0) {
        const auto id = static_cast<size_t>(t.d_->node);
        if (id >= nodes_.size() || nodes_[id] != t.d_)
            throw std::invalid_argument("Tape::watch: tensor belongs to a different tape");
        return t.d_->node;
    }
    t.d_->node = static_cast<int64_t>(nodes_.size());
    nodes_.push_back(t.d_);
    return t.d_->node;
}

void Tape::record(const char* op, std::initializer_list<const Tensor*> inputs,
                  const Tensor& output, std::function<void()> backward) {
    Record rec;
    rec.op = op;
    rec.inputs.reserve(inputs.size());
    for (const Tensor* in : inputs) rec.inputs.push_back(watch(*in));
    rec.output = watch(output);
    rec.backward = std::move(backward);
    records_.push_back(std::move(rec));
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1)
        throw std::invalid_argument("Tape::backward: loss must be a scalar tensor");
    if (loss.d_->node < 0 || static_cast<size_t>(loss.d_->node) >= nodes_.size() ||
        nodes_[static_cast<size_t>(loss.d_->node)] != loss.d_)
        throw std::invalid_argument("Tape::backward: loss is not on this tape");

    for (auto& n : nodes_) {
        n->grad.assign(n->values->size(), 0.0);
    }
    loss.d_->grad[0] = 1.0;

    for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->backward();
}

}  // namespace stef
