#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ltc/tensor.hpp"

namespace ltc {

using NodeId = int32_t;

enum class Op : uint8_t {
  Leaf,
  Add,
  Sub,
  ScalarMul,
  MatMul,
  Relu,
  Tanh,
  Square,
  MaxPoints,
  ReduceSum,
  ReduceMean,
  ConcatFeat,
  BroadcastPoints,
  AddBiasPoints,
  Reshape,
  StopGrad,
  Chamfer,
  UniChamfer,
};

const char* op_name(Op op);

struct Node {
  Op op = Op::Leaf;
  std::array<NodeId, 2> in{-1, -1};
  Tensor value;
  double coeff = 0.0;        // ScalarMul factor; Chamfer/UniChamfer squared flag
  std::vector<int> aux;      // MaxPoints argmax; Chamfer nearest-neighbor indices
  bool trainable = false;    // Leaf only: parameter vs frozen constant
};

// Append-only record of forward operations over dense tensors, replayed in
// reverse insertion order for gradients. Single-owner while being built;
// values and gradients read out of it are plain Tensors.
//
// Every op validates operand shapes and rejects non-finite results.
// Gradients accumulate additively when a node feeds several consumers.
class Tape {
 public:
  // Leaves. Constants never receive gradient storage; parameters do.
  NodeId param(Tensor v);
  NodeId constant(Tensor v);

  // Elementwise, shapes must match exactly.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId scalar_mul(NodeId a, double c);
  NodeId relu(NodeId a);
  NodeId tanh_op(NodeId a);
  NodeId square(NodeId a);

  // (n x k)·(k x m) -> (n x m), or (k)·(k x m) -> (m).
  NodeId matmul(NodeId a, NodeId b);

  // (n x f) -> (f), column-wise max over the point axis; ties resolved to
  // the lowest point index.
  NodeId reduce_max_points(NodeId a);

  NodeId reduce_sum(NodeId a);   // -> scalar
  NodeId reduce_mean(NodeId a);  // -> scalar

  // 1-D: (f1) ++ (f2) -> (f1+f2); 2-D: (n x f1) ++ (n x f2) -> (n x f1+f2).
  NodeId concat_feat(NodeId a, NodeId b);

  // (f) -> (n x f), every row a copy; backward sums over rows.
  NodeId broadcast_points(NodeId a, int n_points);

  // (n x f) + (f): fused broadcast_points + add, one output tensor.
  NodeId add_bias_points(NodeId rows, NodeId bias);

  NodeId reshape(NodeId a, std::vector<int> new_shape);

  // Forward identity; backward contributes exactly zero upstream.
  NodeId stop_gradient(NodeId a);

  // Point-set distances over (n x 3) operands; see metrics.hpp for the
  // shared kernels. Nearest-neighbor assignment is treated as locally
  // constant in the backward pass.
  NodeId chamfer(NodeId a, NodeId b, bool squared = false);
  NodeId unidirectional_chamfer(NodeId src, NodeId dst, bool squared = false);

  // Propagates from a scalar loss through every recorded node in reverse
  // insertion order. May be called repeatedly; gradients reset each time.
  void backward(NodeId loss);

  const Tensor& value(NodeId id) const { return nodes_[id].value; }
  // All-zero (of the node's shape) when the node was not reached.
  Tensor grad(NodeId id) const;

  size_t node_count() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

 private:
  NodeId record(Node n);
  const Node& node_at(NodeId id, const char* op) const;
  Tensor& grad_buffer(NodeId id);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<uint8_t> reached_;
};

}  // namespace ltc
