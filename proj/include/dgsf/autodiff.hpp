// Copyright 2026 The dgsf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reverse-mode tape over Matrix values.
//
// Nodes are appended in evaluation order; backward() walks them in reverse
// and runs each node's closure, which reads the node's own gradient and
// accumulates into its parents. Parameters are registered by address so a
// weight matrix used several times in one forward pass maps to one leaf.

#include <functional>
#include <initializer_list>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dgsf/errors.hpp"
#include "dgsf/tensor.hpp"

namespace dgsf {

template <typename T>
class Tape;

template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Matrix<T>& value() const { return tape->value(id); }
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
};

template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Matrix<T> value) { return push_node(std::move(value), false, nullptr); }

  // Leaf that receives a gradient. Not keyed; every call makes a new leaf.
  Var<T> input(Matrix<T> value) { return push_node(std::move(value), true, nullptr); }

  // Leaf bound to a parameter matrix. The value is copied at registration.
  Var<T> param(const Matrix<T>& m) {
    auto it = params_.find(&m);
    if (it != params_.end()) return {this, it->second};
    Var<T> v = push_node(m, true, nullptr);
    params_.emplace(&m, v.id);
    return v;
  }

  // Records an op output. The closure is dropped when no parent needs a gradient.
  Var<T> record(Matrix<T> value, std::initializer_list<Var<T>> parents, Backward fn) {
    bool needs = false;
    for (const Var<T>& p : parents) needs = needs || nodes_[p.id].needs_grad;
    return push_node(std::move(value), needs, needs ? std::move(fn) : nullptr);
  }
  Var<T> record(Matrix<T> value, const std::vector<Var<T>>& parents, Backward fn) {
    bool needs = false;
    for (const Var<T>& p : parents) needs = needs || nodes_[p.id].needs_grad;
    return push_node(std::move(value), needs, needs ? std::move(fn) : nullptr);
  }

  const Matrix<T>& value(int id) const { return nodes_[id].value; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  // Gradient buffer of a node, allocated on first use; nullptr for nodes
  // that do not need a gradient.
  Matrix<T>* grad_slot(int id) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return nullptr;
    if (!n.has_grad) {
      n.grad = Matrix<T>(n.value.rows, n.value.cols);
      n.has_grad = true;
    }
    return &n.grad;
  }

  // Gradient after backward(); zeros when nothing reached the node.
  Matrix<T> grad(Var<T> v) const {
    const Node& n = nodes_[v.id];
    return n.has_grad ? n.grad : Matrix<T>(n.value.rows, n.value.cols);
  }

  // Gradient of a registered parameter, or nullptr if it was never used.
  const Matrix<T>* param_grad(const Matrix<T>& m) const {
    auto it = params_.find(&m);
    if (it == params_.end() || !nodes_[it->second].has_grad) return nullptr;
    return &nodes_[it->second].grad;
  }

  void backward(Var<T> root) {
    DGSF_ASSERT(root.tape == this, "backward: variable belongs to another tape");
    DGSF_ASSERT(root.rows() == 1 && root.cols() == 1, "backward: root must be a scalar");
    Matrix<T>* g = grad_slot(root.id);
    if (!g) return;
    g->data[0] += T(1);
    for (int id = root.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.has_grad && n.backward) n.backward(*this, id);
    }
  }

  int size() const { return static_cast<int>(nodes_.size()); }

  // Running hash of every discrete decision taken while recording
  // (rectifier signs, max-pool winners, gather indices, masks). Two
  // evaluations with equal signatures took the same smooth branch.
  // Off by default; grad_check turns it on.
  void track_branches(bool on) { track_ = on; }
  bool tracks_branches() const { return track_; }
  void mix_branch(uint64_t h) { signature_ = (signature_ ^ h) * 0x100000001b3ull; }
  uint64_t branch_signature() const { return signature_; }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    bool needs_grad = false;
    bool has_grad = false;
    Backward backward;
  };

  Var<T> push_node(Matrix<T> value, bool needs, Backward fn) {
    nodes_.push_back(Node{std::move(value), {}, needs, false, std::move(fn)});
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Matrix<T>*, int> params_;
  uint64_t signature_ = 0xcbf29ce484222325ull;
  bool track_ = false;
};

}  // namespace dgsf
