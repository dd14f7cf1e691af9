#include "tensor/tensor.hpp"

#include <sstream>

namespace slab {

const char* padding_mode_name(PaddingMode m) {
    switch (m) {
        case PaddingMode::Zeros: return "zeros";
        case PaddingMode::Reflect: return "reflect";
        case PaddingMode::Replicate: return "replicate";
        case PaddingMode::Valid: return "valid";
    }
    return "?";
}

static std::int64_t product(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw DomainError("tensor dims must be positive, got " + shape_to_string(shape));
        n *= d;
    }
    return n;
}

Tensor Tensor::zeros(std::vector<int> shape) {
    return full(std::move(shape), 0.0f);
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    Tensor t;
    std::int64_t n = product(shape);
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<float>>(static_cast<std::size_t>(n), value);
    return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<float> data) {
    std::int64_t n = product(shape);
    if (n != static_cast<std::int64_t>(data.size())) {
        throw DomainError("data length " + std::to_string(data.size()) + " does not match shape " +
                          shape_to_string(shape));
    }
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::make_shared<std::vector<float>>(std::move(data));
    return t;
}

Tensor Tensor::scalar(float value) {
    return from_data({1}, {value});
}

std::int64_t Tensor::numel() const {
    return data_ ? static_cast<std::int64_t>(data_->size()) : 0;
}

float Tensor::item() const {
    if (numel() != 1) throw UsageError("item() requires a single-element tensor, got " + shape_to_string(shape_));
    return (*data_)[0];
}

double Tensor::item64() const {
    if (numel() != 1) throw UsageError("item64() requires a single-element tensor");
    return has_scalar64_ ? scalar64_ : static_cast<double>((*data_)[0]);
}

float Tensor::at(int a, int b) const {
    return (*data_)[static_cast<std::size_t>(a) * shape_[1] + b];
}

float Tensor::at(int a, int b, int c) const {
    return (*data_)[(static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c];
}

float Tensor::at(int a, int b, int c, int d) const {
    return (*data_)[((static_cast<std::size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
}

Tensor Tensor::clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<float>>(*data_);
    return t;
}

std::string shape_to_string(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

}  // namespace slab
