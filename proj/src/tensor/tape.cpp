#include "tensor/tape.hpp"

#include <atomic>

namespace slab {

namespace {
thread_local Tape* g_active = nullptr;
std::atomic<std::uint64_t> g_next_gen{1};
}  // namespace

Tape::Tape() : gen_(g_next_gen.fetch_add(1)) {
    prev_ = g_active;
    g_active = this;
}

Tape::~Tape() {
    g_active = prev_;
}

Tape* Tape::active() {
    return g_active;
}

void Tape::watch(Tensor& t) {
    if (!t.defined()) throw UsageError("cannot watch an undefined tensor");
    if (tracks(t)) return;
    std::int64_t id = static_cast<std::int64_t>(nodes_.size());
    nodes_.push_back(Node{"leaf", {}, t.shape(), nullptr, {}, false});
    t.set_node(gen_, id, true);
}

std::int64_t Tape::record(const char* op, std::vector<std::int64_t> inputs,
                          std::vector<int> out_shape, BackwardFn fn) {
    std::int64_t id = static_cast<std::int64_t>(nodes_.size());
    nodes_.push_back(Node{op, std::move(inputs), std::move(out_shape), std::move(fn), {}, false});
    return id;
}

std::span<const float> Tape::grad_of(std::int64_t node) const {
    const Node& n = nodes_[static_cast<std::size_t>(node)];
    return {n.grad.data(), n.grad.size()};
}

std::span<float> Tape::grad_accum(std::int64_t node) {
    if (node < 0) return {};
    Node& n = nodes_[static_cast<std::size_t>(node)];
    if (!n.grad_alloc) {
        std::int64_t count = 1;
        for (int d : n.shape) count *= d;
        n.grad.assign(static_cast<std::size_t>(count), 0.0f);
        n.grad_alloc = true;
    }
    return {n.grad.data(), n.grad.size()};
}

bool Tape::grad_present(std::int64_t node) const {
    return node >= 0 && nodes_[static_cast<std::size_t>(node)].grad_alloc;
}

void Tape::backward(const Tensor& loss) {
    if (loss.numel() != 1) {
        throw UsageError("backward() requires a scalar loss, got " + shape_to_string(loss.shape()));
    }
    if (!tracks(loss)) {
        throw UsageError("backward() loss is not connected to the active tape");
    }
    grad_accum(loss.node())[0] = 1.0f;
    for (std::int64_t i = loss.node(); i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.grad_alloc || !n.backward) continue;
        n.backward(*this, i);
    }
}

Tensor Tape::grad(const Tensor& t) const {
    if (!t.defined()) throw UsageError("grad() of an undefined tensor");
    if (!tracks(t) || !grad_present(t.node())) {
        return Tensor::zeros(t.shape());
    }
    const Node& n = nodes_[static_cast<std::size_t>(t.node())];
    std::vector<float> copy = n.grad;
    return Tensor::from_data(t.shape(), std::move(copy));
}

}  // namespace slab
