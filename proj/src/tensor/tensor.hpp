#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace slab {

enum class PaddingMode { Zeros, Reflect, Replicate, Valid };

const char* padding_mode_name(PaddingMode m);

// Dense row-major float32 tensor. Value semantics with shared storage:
// copies are cheap and alias the same buffer. By convention a tensor is
// immutable once it has been produced by an op; only initializers and the
// optimizer write through mut_data().
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, float value);
    static Tensor from_data(std::vector<int> shape, std::vector<float> data);
    static Tensor scalar(float value);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    std::int64_t numel() const;
    bool defined() const { return data_ != nullptr; }

    // Ref-qualified: spans into a temporary would dangle.
    std::span<const float> data() const& { return {data_->data(), data_->size()}; }
    std::span<const float> data() const&& = delete;
    std::span<float> mut_data() & { return {data_->data(), data_->size()}; }
    std::span<float> mut_data() && = delete;
    const float* ptr() const& { return data_->data(); }
    const float* ptr() const&& = delete;

    float item() const;

    // Reductions and scalar arithmetic carry their exact 64-bit value along
    // with the rounded f32 payload; gradient checks difference against it.
    double item64() const;
    void set_scalar64(double v) {
        scalar64_ = v;
        has_scalar64_ = true;
    }

    // Rank-specific accessors (unchecked beyond debug asserts).
    float at(int a) const { return (*data_)[static_cast<std::size_t>(a)]; }
    float at(int a, int b) const;
    float at(int a, int b, int c) const;
    float at(int a, int b, int c, int d) const;

    Tensor clone() const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // Autodiff linkage. `tape_gen` identifies which tape the node id belongs
    // to; a tensor whose generation does not match the active tape is treated
    // as a constant.
    bool requires_grad() const { return requires_grad_; }
    std::int64_t node() const { return node_; }
    std::uint64_t tape_gen() const { return tape_gen_; }
    void set_node(std::uint64_t gen, std::int64_t node, bool requires_grad = false) {
        tape_gen_ = gen;
        node_ = node;
        requires_grad_ = requires_grad;
    }

private:
    std::vector<int> shape_;
    std::shared_ptr<std::vector<float>> data_;
    std::uint64_t tape_gen_ = 0;
    std::int64_t node_ = -1;
    double scalar64_ = 0.0;
    bool has_scalar64_ = false;
    bool requires_grad_ = false;
};

std::string shape_to_string(const std::vector<int>& shape);

}  // namespace slab
