#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tensor/tensor.hpp"

namespace slab {

// Reverse-mode tape. Nodes are appended in creation order; backward() walks
// them strictly in reverse, so creation order doubles as topological order.
// Gradients accumulate additively wherever a node fans out.
//
// One tape is active per thread at a time (RAII scope). Ops record onto the
// active tape only when at least one input carries a node of that tape, so
// forward code is identical with and without a tape in scope.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::int64_t self)>;

    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    std::uint64_t gen() const { return gen_; }

    // Registers a leaf; subsequent ops consuming `t` will be recorded.
    void watch(Tensor& t);

    // Appends an interior node and returns its id.
    std::int64_t record(const char* op, std::vector<std::int64_t> inputs,
                        std::vector<int> out_shape, BackwardFn fn);

    // True if `t` is a node of this tape.
    bool tracks(const Tensor& t) const { return t.node() >= 0 && t.tape_gen() == gen_; }

    void backward(const Tensor& loss);

    // Gradient of a watched/tracked tensor after backward(); zeros if the
    // tensor never influenced the loss.
    Tensor grad(const Tensor& t) const;

    // --- accessors for backward closures ---
    std::span<const float> grad_of(std::int64_t node) const;
    // Lazily allocates and returns the accumulation buffer for `node`.
    // Returns an empty span for node < 0 (constant input).
    std::span<float> grad_accum(std::int64_t node);
    bool grad_present(std::int64_t node) const;

    std::size_t size() const { return nodes_.size(); }
    const std::string& op_name(std::int64_t node) const { return nodes_[static_cast<std::size_t>(node)].op; }

private:
    struct Node {
        std::string op;
        std::vector<std::int64_t> inputs;
        std::vector<int> shape;
        BackwardFn backward;
        std::vector<float> grad;
        bool grad_alloc = false;
    };

    std::vector<Node> nodes_;
    std::uint64_t gen_;
    Tape* prev_ = nullptr;
};

}  // namespace slab
