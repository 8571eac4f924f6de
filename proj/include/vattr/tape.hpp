// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "vattr/common.hpp"

namespace vattr {

// Reverse-mode tape over exactly the primitives the training graphs need.
// Building an op evaluates it immediately; backward() walks the record in
// reverse and accumulates adjoints, flushing parameter-leaf adjoints into
// the caller's gradient buffers. Scalars are size-1 nodes. Every forward
// result is checked for finiteness and a NumericError names the offending
// node.
//
// One tape per training step; tapes are independent and must not be shared
// across threads.
class Tape {
 public:
  using Id = int;

  // Leaves. Parameter leaves copy the current values and, on backward(),
  // accumulate d(loss)/d(param) into `grad` (which must outlive the tape).
  Id constant(std::span<const double> value);
  Id constant_scalar(double value);
  Id param(std::span<const double> value, std::span<double> grad);

  // row `r` of an (rows x cols) matrix node
  Id row(Id matrix, int r, int cols);

  // W x + b for an (rows x cols) matrix node
  Id matvec_bias(Id w, int rows, int cols, Id x, Id b);

  Id concat3(Id a, Id b, Id c);
  Id relu(Id x);
  Id sigmoid(Id x);

  // Guarded cosine similarity between a query and each row of a slot matrix.
  Id slot_cosines(Id matrix, int nslots, int cols, Id query);

  // softmax(scale * x) with max subtraction.
  Id scaled_softmax(Id x, double scale);

  // matrix^T w: the w-weighted sum of slot rows.
  Id weighted_sum(Id matrix, int nslots, int cols, Id w);

  Id add(Id a, Id b);

  // alpha * x + (1 - alpha) * y; alpha is a scalar node (gradient flows
  // through it) or a plain constant.
  Id mix(Id alpha, Id x, Id y);
  Id mix_const(double alpha, Id x, Id y);

  // ||a - b||^2, the squared-L2 reconstruction error (no 1/D averaging).
  Id sq_l2_diff(Id a, Id b);

  // sum_i max(p_i,c) * log(max(p_i,c)/max(q_i,c)), c = 1e-12.
  Id kl_div(Id p, Id q);

  // mu + exp(logvar/2) * eps with a fixed eps draw; gradients flow to both
  // heads.
  Id reparam(Id mu, Id logvar, double eps);

  Id scale(Id x, double c);
  Id add_scaled(Id a, double ca, Id b, double cb);  // ca*a + cb*b

  std::span<const double> value(Id id) const;
  double value_scalar(Id id) const;

  void backward(Id loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kConstant,
    kParam,
    kRow,
    kMatVecBias,
    kConcat3,
    kRelu,
    kSigmoid,
    kSlotCosines,
    kScaledSoftmax,
    kWeightedSum,
    kAdd,
    kMix,
    kMixConst,
    kSqL2Diff,
    kKlDiv,
    kReparam,
    kScale,
    kAddScaled,
  };

  struct Node {
    Op op;
    Id a = -1, b = -1, c = -1;
    int rows = 0, cols = 0;
    double c0 = 0, c1 = 0;
    std::vector<double> value;
    std::vector<double> adjoint;
    std::vector<double> aux;  // forward caches for backward
    const double* pvalue = nullptr;  // param leaves
    double* pgrad = nullptr;
    std::size_t psize = 0;
  };

  Id push(Node node);
  Node& at(Id id);
  const Node& at(Id id) const;
  void check_finite(const Node& node, Id id) const;
  static const char* op_name(Op op);

  std::vector<Node> nodes_;
};

}  // namespace vattr
