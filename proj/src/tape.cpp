#include "ltc/tape.hpp"

#include <algorithm>
#include <cmath>

#include "ltc/gemm.hpp"
#include "ltc/metrics.hpp"

namespace ltc {

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::ScalarMul: return "scalar_mul";
    case Op::MatMul: return "matmul";
    case Op::Relu: return "relu";
    case Op::Tanh: return "tanh";
    case Op::Square: return "square";
    case Op::MaxPoints: return "reduce_max_points";
    case Op::ReduceSum: return "reduce_sum";
    case Op::ReduceMean: return "reduce_mean";
    case Op::ConcatFeat: return "concat_feat";
    case Op::BroadcastPoints: return "broadcast_points";
    case Op::AddBiasPoints: return "add_bias_points";
    case Op::Reshape: return "reshape";
    case Op::StopGrad: return "stop_gradient";
    case Op::Chamfer: return "chamfer";
    case Op::UniChamfer: return "unidirectional_chamfer";
  }
  return "?";
}

NodeId Tape::record(Node n) {
  if (!n.value.all_finite())
    throw Error(std::string("tape: non-finite value produced by ") + op_name(n.op));
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

const Node& Tape::node_at(NodeId id, const char* op) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
    throw Error(std::string(op) + ": node id " + std::to_string(id) + " not on tape");
  return nodes_[id];
}

NodeId Tape::param(Tensor v) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  n.trainable = true;
  return record(std::move(n));
}

NodeId Tape::constant(Tensor v) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  return record(std::move(n));
}

static Node binary_elementwise(Op op, NodeId a, NodeId b, const Tensor& va, const Tensor& vb) {
  if (!va.same_shape(vb))
    throw Error(std::string(op_name(op)) + ": shape mismatch " + shape_str(va.shape) +
                " vs " + shape_str(vb.shape));
  Node n;
  n.op = op;
  n.in = {a, b};
  n.value = Tensor::zeros(va.shape);
  return n;
}

NodeId Tape::add(NodeId a, NodeId b) {
  const Tensor& va = node_at(a, "add").value;
  const Tensor& vb = node_at(b, "add").value;
  Node n = binary_elementwise(Op::Add, a, b, va, vb);
  for (size_t i = 0; i < va.data.size(); ++i) n.value.data[i] = va.data[i] + vb.data[i];
  return record(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& va = node_at(a, "sub").value;
  const Tensor& vb = node_at(b, "sub").value;
  Node n = binary_elementwise(Op::Sub, a, b, va, vb);
  for (size_t i = 0; i < va.data.size(); ++i) n.value.data[i] = va.data[i] - vb.data[i];
  return record(std::move(n));
}

NodeId Tape::scalar_mul(NodeId a, double c) {
  const Tensor& va = node_at(a, "scalar_mul").value;
  Node n;
  n.op = Op::ScalarMul;
  n.in = {a, -1};
  n.coeff = c;
  n.value = Tensor::zeros(va.shape);
  for (size_t i = 0; i < va.data.size(); ++i) n.value.data[i] = c * va.data[i];
  return record(std::move(n));
}

NodeId Tape::relu(NodeId a) {
  const Tensor& va = node_at(a, "relu").value;
  Node n;
  n.op = Op::Relu;
  n.in = {a, -1};
  n.value = Tensor::zeros(va.shape);
  for (size_t i = 0; i < va.data.size(); ++i)
    n.value.data[i] = va.data[i] > 0.0 ? va.data[i] : 0.0;
  return record(std::move(n));
}

NodeId Tape::tanh_op(NodeId a) {
  const Tensor& va = node_at(a, "tanh").value;
  Node n;
  n.op = Op::Tanh;
  n.in = {a, -1};
  n.value = Tensor::zeros(va.shape);
  for (size_t i = 0; i < va.data.size(); ++i) n.value.data[i] = std::tanh(va.data[i]);
  return record(std::move(n));
}

NodeId Tape::square(NodeId a) {
  const Tensor& va = node_at(a, "square").value;
  Node n;
  n.op = Op::Square;
  n.in = {a, -1};
  n.value = Tensor::zeros(va.shape);
  for (size_t i = 0; i < va.data.size(); ++i) n.value.data[i] = va.data[i] * va.data[i];
  return record(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& va = node_at(a, "matmul").value;
  const Tensor& vb = node_at(b, "matmul").value;
  if (vb.shape.size() != 2)
    throw Error("matmul: right operand must be 2-D, got " + shape_str(vb.shape));
  Node n;
  n.op = Op::MatMul;
  n.in = {a, b};
  if (va.shape.size() == 2) {
    if (va.shape[1] != vb.shape[0])
      throw Error("matmul: shape mismatch " + shape_str(va.shape) + " vs " +
                  shape_str(vb.shape));
    n.value = Tensor::zeros({va.shape[0], vb.shape[1]});
    gemm_acc(va.data.data(), vb.data.data(), n.value.data.data(), va.shape[0],
             va.shape[1], vb.shape[1]);
  } else if (va.shape.size() == 1) {
    if (va.shape[0] != vb.shape[0])
      throw Error("matmul: shape mismatch " + shape_str(va.shape) + " vs " +
                  shape_str(vb.shape));
    n.value = Tensor::zeros({vb.shape[1]});
    gemm_acc(va.data.data(), vb.data.data(), n.value.data.data(), 1, va.shape[0],
             vb.shape[1]);
  } else {
    throw Error("matmul: left operand must be 1-D or 2-D, got " + shape_str(va.shape));
  }
  return record(std::move(n));
}

NodeId Tape::reduce_max_points(NodeId a) {
  const Tensor& va = node_at(a, "reduce_max_points").value;
  if (va.shape.size() != 2)
    throw Error("reduce_max_points: expected 2-D input, got " + shape_str(va.shape));
  const int rows = va.shape[0], cols = va.shape[1];
  Node n;
  n.op = Op::MaxPoints;
  n.in = {a, -1};
  n.value = Tensor::zeros({cols});
  n.aux.assign(cols, 0);
  for (int j = 0; j < cols; ++j) {
    double best = va.at(0, j);
    int best_i = 0;
    for (int i = 1; i < rows; ++i) {
      if (va.at(i, j) > best) {  // strict: ties keep the lowest point index
        best = va.at(i, j);
        best_i = i;
      }
    }
    n.value.data[j] = best;
    n.aux[j] = best_i;
  }
  return record(std::move(n));
}

NodeId Tape::reduce_sum(NodeId a) {
  const Tensor& va = node_at(a, "reduce_sum").value;
  double s = 0.0;
  for (double v : va.data) s += v;
  Node n;
  n.op = Op::ReduceSum;
  n.in = {a, -1};
  n.value = Tensor::scalar(s);
  return record(std::move(n));
}

NodeId Tape::reduce_mean(NodeId a) {
  const Tensor& va = node_at(a, "reduce_mean").value;
  double s = 0.0;
  for (double v : va.data) s += v;
  Node n;
  n.op = Op::ReduceMean;
  n.in = {a, -1};
  n.value = Tensor::scalar(s / static_cast<double>(va.size()));
  return record(std::move(n));
}

NodeId Tape::concat_feat(NodeId a, NodeId b) {
  const Tensor& va = node_at(a, "concat_feat").value;
  const Tensor& vb = node_at(b, "concat_feat").value;
  Node n;
  n.op = Op::ConcatFeat;
  n.in = {a, b};
  if (va.shape.size() == 1 && vb.shape.size() == 1) {
    n.value = Tensor::zeros({va.shape[0] + vb.shape[0]});
    std::copy(va.data.begin(), va.data.end(), n.value.data.begin());
    std::copy(vb.data.begin(), vb.data.end(), n.value.data.begin() + va.shape[0]);
  } else if (va.shape.size() == 2 && vb.shape.size() == 2 && va.shape[0] == vb.shape[0]) {
    const int rows = va.shape[0], fa = va.shape[1], fb = vb.shape[1];
    n.value = Tensor::zeros({rows, fa + fb});
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < fa; ++j) n.value.at(i, j) = va.at(i, j);
      for (int j = 0; j < fb; ++j) n.value.at(i, fa + j) = vb.at(i, j);
    }
  } else {
    throw Error("concat_feat: shape mismatch " + shape_str(va.shape) + " vs " +
                shape_str(vb.shape));
  }
  return record(std::move(n));
}

NodeId Tape::broadcast_points(NodeId a, int n_points) {
  const Tensor& va = node_at(a, "broadcast_points").value;
  if (va.shape.size() != 1)
    throw Error("broadcast_points: expected 1-D input, got " + shape_str(va.shape));
  if (n_points < 1) throw Error("broadcast_points: n_points must be >= 1");
  const int f = va.shape[0];
  Node n;
  n.op = Op::BroadcastPoints;
  n.in = {a, -1};
  n.value = Tensor::zeros({n_points, f});
  for (int i = 0; i < n_points; ++i)
    for (int j = 0; j < f; ++j) n.value.at(i, j) = va.data[j];
  return record(std::move(n));
}

NodeId Tape::add_bias_points(NodeId rows, NodeId bias) {
  const Tensor& vr = node_at(rows, "add_bias_points").value;
  const Tensor& vb = node_at(bias, "add_bias_points").value;
  if (vr.shape.size() != 2 || vb.shape.size() != 1 || vr.shape[1] != vb.shape[0])
    throw Error("add_bias_points: shape mismatch " + shape_str(vr.shape) + " vs " +
                shape_str(vb.shape));
  const int n = vr.shape[0], f = vr.shape[1];
  Node node;
  node.op = Op::AddBiasPoints;
  node.in = {rows, bias};
  node.value = Tensor::zeros({n, f});
  for (int i = 0; i < n; ++i) {
    const double* src = vr.data.data() + static_cast<size_t>(i) * f;
    double* dst = node.value.data.data() + static_cast<size_t>(i) * f;
    for (int j = 0; j < f; ++j) dst[j] = src[j] + vb.data[j];
  }
  return record(std::move(node));
}

NodeId Tape::reshape(NodeId a, std::vector<int> new_shape) {
  const Tensor& va = node_at(a, "reshape").value;
  if (shape_size(new_shape) != va.size())
    throw Error("reshape: cannot view " + shape_str(va.shape) + " as " +
                shape_str(new_shape));
  Node n;
  n.op = Op::Reshape;
  n.in = {a, -1};
  n.value = Tensor(std::move(new_shape), va.data);
  return record(std::move(n));
}

NodeId Tape::stop_gradient(NodeId a) {
  const Tensor& va = node_at(a, "stop_gradient").value;
  Node n;
  n.op = Op::StopGrad;
  n.in = {a, -1};
  n.value = va;  // forward is bit-identical to the input
  return record(std::move(n));
}

NodeId Tape::chamfer(NodeId a, NodeId b, bool squared) {
  const Tensor& va = node_at(a, "chamfer").value;
  const Tensor& vb = node_at(b, "chamfer").value;
  const auto nn_ab = nearest_neighbor_indices(va, vb);
  const auto nn_ba = nearest_neighbor_indices(vb, va);
  Node n;
  n.op = Op::Chamfer;
  n.in = {a, b};
  n.coeff = squared ? 1.0 : 0.0;
  n.value = Tensor::scalar(directed_mean_nn_distance(va, vb, nn_ab, squared) +
                           directed_mean_nn_distance(vb, va, nn_ba, squared));
  n.aux.reserve(nn_ab.size() + nn_ba.size());
  n.aux.insert(n.aux.end(), nn_ab.begin(), nn_ab.end());
  n.aux.insert(n.aux.end(), nn_ba.begin(), nn_ba.end());
  return record(std::move(n));
}

NodeId Tape::unidirectional_chamfer(NodeId src, NodeId dst, bool squared) {
  const Tensor& vs = node_at(src, "unidirectional_chamfer").value;
  const Tensor& vd = node_at(dst, "unidirectional_chamfer").value;
  const auto nn = nearest_neighbor_indices(vs, vd);
  Node n;
  n.op = Op::UniChamfer;
  n.in = {src, dst};
  n.coeff = squared ? 1.0 : 0.0;
  n.value = Tensor::scalar(directed_mean_nn_distance(vs, vd, nn, squared));
  n.aux = nn;
  return record(std::move(n));
}

Tensor& Tape::grad_buffer(NodeId id) {
  Tensor& g = grads_[id];
  if (g.data.empty()) g = Tensor::zeros(nodes_[id].value.shape);
  return g;
}

// Frozen constant leaves never need gradient storage; accumulation into
// them is skipped entirely.
static bool skip_grad(const std::vector<Node>& nodes, NodeId id) {
  const Node& n = nodes[id];
  return n.op == Op::Leaf && !n.trainable;
}

// Gradient of one chamfer direction: d/dp ||p - q|| with the assignment nn
// held fixed. Zero-distance pairs contribute a zero subgradient.
static void chamfer_direction_backward(const Tensor& src, const Tensor& dst,
                                       const std::vector<int>& nn, bool squared,
                                       double g_scaled, Tensor* gsrc, Tensor* gdst) {
  const int ns = src.shape[0];
  const double* s = src.data.data();
  const double* d = dst.data.data();
  for (int i = 0; i < ns; ++i) {
    const int j = nn[i];
    const double dx = s[3 * i] - d[3 * j];
    const double dy = s[3 * i + 1] - d[3 * j + 1];
    const double dz = s[3 * i + 2] - d[3 * j + 2];
    double cx, cy, cz;
    if (squared) {
      cx = 2.0 * dx * g_scaled;
      cy = 2.0 * dy * g_scaled;
      cz = 2.0 * dz * g_scaled;
    } else {
      const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
      if (dist == 0.0) continue;
      const double f = g_scaled / dist;
      cx = dx * f;
      cy = dy * f;
      cz = dz * f;
    }
    if (gsrc) {
      gsrc->data[3 * i] += cx;
      gsrc->data[3 * i + 1] += cy;
      gsrc->data[3 * i + 2] += cz;
    }
    if (gdst) {
      gdst->data[3 * j] -= cx;
      gdst->data[3 * j + 1] -= cy;
      gdst->data[3 * j + 2] -= cz;
    }
  }
}

void Tape::backward(NodeId loss) {
  const Tensor& lv = node_at(loss, "backward").value;
  if (lv.size() != 1)
    throw Error("backward: loss must be scalar, got shape " + shape_str(lv.shape));

  grads_.assign(nodes_.size(), Tensor());
  reached_.assign(nodes_.size(), 0);
  grad_buffer(loss).data[0] = 1.0;
  reached_[loss] = 1;

  for (NodeId id = loss; id >= 0; --id) {
    if (!reached_[id]) continue;
    const Node& n = nodes_[id];
    if (n.op == Op::Leaf) continue;
    const Tensor& g = grads_[id];
    const NodeId a = n.in[0], b = n.in[1];
    const bool skip_a = a >= 0 && skip_grad(nodes_, a);
    const bool skip_b = b >= 0 && skip_grad(nodes_, b);

    switch (n.op) {
      case Op::Add: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
          reached_[a] = 1;
        }
        if (!skip_b) {
          Tensor& gb = grad_buffer(b);
          for (size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i];
          reached_[b] = 1;
        }
        break;
      }
      case Op::Sub: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
          reached_[a] = 1;
        }
        if (!skip_b) {
          Tensor& gb = grad_buffer(b);
          for (size_t i = 0; i < g.data.size(); ++i) gb.data[i] -= g.data[i];
          reached_[b] = 1;
        }
        break;
      }
      case Op::ScalarMul: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += n.coeff * g.data[i];
          reached_[a] = 1;
        }
        break;
      }
      case Op::Relu: {
        if (!skip_a) {
          const Tensor& x = nodes_[a].value;
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i)
            if (x.data[i] > 0.0) ga.data[i] += g.data[i];
          reached_[a] = 1;
        }
        break;
      }
      case Op::Tanh: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i) {
            const double y = n.value.data[i];
            ga.data[i] += (1.0 - y * y) * g.data[i];
          }
          reached_[a] = 1;
        }
        break;
      }
      case Op::Square: {
        if (!skip_a) {
          const Tensor& x = nodes_[a].value;
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i)
            ga.data[i] += 2.0 * x.data[i] * g.data[i];
          reached_[a] = 1;
        }
        break;
      }
      case Op::MatMul: {
        const Tensor& va = nodes_[a].value;
        const Tensor& vb = nodes_[b].value;
        if (va.shape.size() == 2) {
          const int nr = va.shape[0], k = va.shape[1], m = vb.shape[1];
          if (!skip_a) {
            // dA += dC · B^T
            std::vector<double> bt(vb.data.size());
            transpose(vb.data.data(), bt.data(), k, m);
            gemm_acc(g.data.data(), bt.data(), grad_buffer(a).data.data(), nr, m, k);
            reached_[a] = 1;
          }
          if (!skip_b) {
            // dB += A^T · dC
            std::vector<double> at(va.data.size());
            transpose(va.data.data(), at.data(), nr, k);
            gemm_acc(at.data(), g.data.data(), grad_buffer(b).data.data(), k, nr, m);
            reached_[b] = 1;
          }
        } else {
          const int k = va.shape[0], m = vb.shape[1];
          if (!skip_a) {
            Tensor& ga = grad_buffer(a);
            for (int p = 0; p < k; ++p) {
              double s = 0.0;
              for (int j = 0; j < m; ++j) s += vb.data[static_cast<size_t>(p) * m + j] * g.data[j];
              ga.data[p] += s;
            }
            reached_[a] = 1;
          }
          if (!skip_b) {
            Tensor& gb = grad_buffer(b);
            for (int p = 0; p < k; ++p) {
              const double xp = va.data[p];
              for (int j = 0; j < m; ++j) gb.data[static_cast<size_t>(p) * m + j] += xp * g.data[j];
            }
            reached_[b] = 1;
          }
        }
        break;
      }
      case Op::MaxPoints: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          const int cols = n.value.shape[0];
          for (int j = 0; j < cols; ++j)
            ga.data[static_cast<size_t>(n.aux[j]) * cols + j] += g.data[j];
          reached_[a] = 1;
        }
        break;
      }
      case Op::ReduceSum: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          for (double& v : ga.data) v += g.data[0];
          reached_[a] = 1;
        }
        break;
      }
      case Op::ReduceMean: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          const double s = g.data[0] / static_cast<double>(ga.data.size());
          for (double& v : ga.data) v += s;
          reached_[a] = 1;
        }
        break;
      }
      case Op::ConcatFeat: {
        const Tensor& va = nodes_[a].value;
        const Tensor& vb = nodes_[b].value;
        if (va.shape.size() == 1) {
          const int fa = va.shape[0], fb = vb.shape[0];
          if (!skip_a) {
            Tensor& ga = grad_buffer(a);
            for (int j = 0; j < fa; ++j) ga.data[j] += g.data[j];
            reached_[a] = 1;
          }
          if (!skip_b) {
            Tensor& gb = grad_buffer(b);
            for (int j = 0; j < fb; ++j) gb.data[j] += g.data[fa + j];
            reached_[b] = 1;
          }
        } else {
          const int rows = va.shape[0], fa = va.shape[1], fb = vb.shape[1];
          if (!skip_a) {
            Tensor& ga = grad_buffer(a);
            for (int i = 0; i < rows; ++i)
              for (int j = 0; j < fa; ++j)
                ga.at(i, j) += g.data[static_cast<size_t>(i) * (fa + fb) + j];
            reached_[a] = 1;
          }
          if (!skip_b) {
            Tensor& gb = grad_buffer(b);
            for (int i = 0; i < rows; ++i)
              for (int j = 0; j < fb; ++j)
                gb.at(i, j) += g.data[static_cast<size_t>(i) * (fa + fb) + fa + j];
            reached_[b] = 1;
          }
        }
        break;
      }
      case Op::BroadcastPoints: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          const int f = static_cast<int>(ga.data.size());
          const int rows = n.value.shape[0];
          for (int i = 0; i < rows; ++i)
            for (int j = 0; j < f; ++j) ga.data[j] += g.data[static_cast<size_t>(i) * f + j];
          reached_[a] = 1;
        }
        break;
      }
      case Op::AddBiasPoints: {
        const int rows = n.value.shape[0];
        const int f = n.value.shape[1];
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
          reached_[a] = 1;
        }
        if (!skip_b) {
          Tensor& gb = grad_buffer(b);
          for (int i = 0; i < rows; ++i)
            for (int j = 0; j < f; ++j)
              gb.data[j] += g.data[static_cast<size_t>(i) * f + j];
          reached_[b] = 1;
        }
        break;
      }
      case Op::Reshape: {
        if (!skip_a) {
          Tensor& ga = grad_buffer(a);
          for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
          reached_[a] = 1;
        }
        break;
      }
      case Op::StopGrad:
        break;  // upstream contribution is exactly zero
      case Op::Chamfer: {
        const Tensor& va = nodes_[a].value;
        const Tensor& vb = nodes_[b].value;
        const bool squared = n.coeff != 0.0;
        const int ns = va.shape[0], nd = vb.shape[0];
        const std::vector<int> nn_ab(n.aux.begin(), n.aux.begin() + ns);
        const std::vector<int> nn_ba(n.aux.begin() + ns, n.aux.end());
        Tensor* ga = skip_a ? nullptr : &grad_buffer(a);
        Tensor* gb = skip_b ? nullptr : &grad_buffer(b);
        chamfer_direction_backward(va, vb, nn_ab, squared, g.data[0] / ns, ga, gb);
        chamfer_direction_backward(vb, va, nn_ba, squared, g.data[0] / nd, gb, ga);
        if (ga) reached_[a] = 1;
        if (gb) reached_[b] = 1;
        break;
      }
      case Op::UniChamfer: {
        const Tensor& va = nodes_[a].value;
        const Tensor& vb = nodes_[b].value;
        const bool squared = n.coeff != 0.0;
        const int ns = va.shape[0];
        Tensor* ga = skip_a ? nullptr : &grad_buffer(a);
        Tensor* gb = skip_b ? nullptr : &grad_buffer(b);
        chamfer_direction_backward(va, vb, n.aux, squared, g.data[0] / ns, ga, gb);
        if (ga) reached_[a] = 1;
        if (gb) reached_[b] = 1;
        break;
      }
      case Op::Leaf:
        break;
    }
  }
}

Tensor Tape::grad(NodeId id) const {
  node_at(id, "grad");
  if (id < static_cast<NodeId>(grads_.size()) && !grads_[id].data.empty())
    return grads_[id];
  return Tensor::zeros(nodes_[id].value.shape);
}

}  // namespace ltc
