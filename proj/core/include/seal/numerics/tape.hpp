// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "seal/numerics/parameters.hpp"
#include "seal/numerics/tensor.hpp"

namespace seal {

class Tape;
using NodeId = std::uint32_t;

/// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  NodeId id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

/// Reverse-mode gradient tape. Nodes are appended in evaluation order, so the
/// reverse of insertion order is a valid reverse topological order.
///
/// A tape is owned by a single thread for its whole lifetime. With gradients
/// disabled it records values only, which is what inference uses.
class Tape {
 public:
  using Backward = std::function<void(Tape&, NodeId self)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Tensor value);
  /// Free-standing differentiable input (not bound to a ParameterStore).
  Var leaf(Tensor value);
  /// Binds a parameter; repeated calls for the same parameter return the same node.
  Var param(Parameter& p);

  /// Appends an operation result. `backward` is kept only when some input
  /// requires a gradient. Throws NumericError if `value` is not finite.
  Var record(Tensor value, std::span<const Var> inputs, Backward backward, const char* op);
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward, const char* op) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward),
                  op);
  }

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  const Tensor& value(const Var& v) const { return nodes_[v.id()].value; }
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }

  /// Upstream gradient of a node (empty span if nothing flowed into it).
  std::span<const double> grad_in(NodeId id) const { return nodes_[id].grad; }
  /// Mutable gradient accumulator for an input node, allocated on demand.
  std::vector<double>& grad_out(NodeId id);

  /// Runs the backward pass from a scalar loss and accumulates parameter
  /// gradients into their ParameterStore slots.
  void backward(const Var& loss);
  /// Clears node gradients so backward may run again.
  void reset_gradients();

  /// Gradient of `v` after backward; zeros when nothing reached it.
  Tensor grad(const Var& v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };

  Var push(Node node);

  std::deque<Node> nodes_;  // deque: references from value() survive later records
  std::unordered_map<const Parameter*, NodeId> param_nodes_;
  bool grad_enabled_;
  bool backward_done_ = false;
};

}  // namespace seal
