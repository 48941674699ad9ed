#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "comet/tensor.hpp"

namespace comet {

// Named trainable tensors with accumulated gradients.
class ParamStore {
public:
    Tensor& create(const std::string& name, int rows, int cols,
                   std::mt19937_64& rng, double lo = -0.08, double hi = 0.08);
    Tensor& create_zeros(const std::string& name, int rows, int cols);

    bool has(const std::string& name) const { return params_.count(name) > 0; }
    Tensor& value(const std::string& name) { return params_.at(name).value; }
    const Tensor& value(const std::string& name) const {
        return params_.at(name).value;
    }
    Tensor& grad(const std::string& name) { return params_.at(name).grad; }

    void zero_grads();

    // Deterministic (name-sorted) iteration.
    template <typename Fn>
    void for_each(Fn&& fn) {
        for (auto& [name, p] : params_) fn(name, p.value, p.grad);
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& [name, p] : params_) fn(name, p.value, p.grad);
    }

    std::size_t total_size() const;

private:
    struct Param {
        Tensor value;
        Tensor grad;
    };
    std::map<std::string, Param> params_;
};

// Reverse-mode tape over vector/matrix nodes. Values are computed eagerly;
// backward() walks the tape in reverse. One tape per forward pass.
class Tape {
public:
    using V = int;

    explicit Tape(ParamStore* store) : store_(store) {}
    // backward closures capture this; the tape must stay put
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = delete;
    Tape& operator=(Tape&&) = delete;

    V input(Tensor t);
    V param(const std::string& name);
    V param_row(const std::string& name, int row);

    V matvec(V w, V x);
    V add(V a, V b);
    V sub(V a, V b);
    V mul(V a, V b);  // elementwise
    V scale(V a, double s);
    V add_scalar(V a, double s);
    V sigmoid(V a);
    V tanh_(V a);
    V relu(V a);
    V concat(const std::vector<V>& parts);
    V slice(V a, int begin, int len);
    V dot(V a, V b);  // 1x1 result
    V sum(const std::vector<V>& terms);
    V softmax(V scores);
    // Additive-bias softmax; entries with bias <= threshold are blocked and
    // get exact zero weight. Fully blocked rows fall back to uniform.
    V softmax_bias(V scores, const std::vector<double>& bias);
    V weighted_sum(V weights, const std::vector<V>& vectors);
    V pick(V vec, int index);  // 1x1
    V log_(V a);
    V neg(V a);
    // gate*a + (1-gate)*b, gate 1x1
    V mix(V gate, V a, V b);
    // Pointer-generator merge into an extended vocabulary:
    // out[i] = gate*gen[i] (i < gen_size) + (1-gate) * sum_{p: map[p]=i} copy[p]
    V pointer_mix(V gate, V gen, V copy, const std::vector<int>& copy_map,
                  int ext_size);
    // out = probs .* mask / sum(probs .* mask); mask entries are 0/1
    V mask_renorm(V probs, const std::vector<double>& mask01);
    V dropout(V a, double rate, std::mt19937_64& rng, bool enabled);

    const Tensor& value(V id) const { return nodes_[id].value; }
    Tensor& grad(V id) { return nodes_[id].grad; }

    void backward(V root);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void()> back;  // empty for leaves
    };

    ParamStore* store_;
    std::vector<Node> nodes_;

    V push(Tensor value, std::function<void()> back = {});
};

}  // namespace comet
