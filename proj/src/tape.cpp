// SPDX-License-Identifier: Apache-2.0
#include "vattr/tape.hpp"

#include <cmath>

#include "vattr/kernels.hpp"
#include "vattr/memnet.hpp"

namespace vattr {

namespace {
constexpr double kKlClamp = 1e-12;
}

Tape::Id Tape::push(Node node) {
  const Id id = static_cast<Id>(nodes_.size());
  check_finite(node, id);
  nodes_.push_back(std::move(node));
  return id;
}

Tape::Node& Tape::at(Id id) { return nodes_[static_cast<std::size_t>(id)]; }
const Tape::Node& Tape::at(Id id) const {
  return nodes_[static_cast<std::size_t>(id)];
}

void Tape::check_finite(const Node& node, Id id) const {
  for (double v : node.value) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite value in tape node #" +
                         std::to_string(id) + " (" + op_name(node.op) + ")");
    }
  }
}

const char* Tape::op_name(Op op) {
  switch (op) {
    case Op::kConstant: return "constant";
    case Op::kParam: return "param";
    case Op::kRow: return "row";
    case Op::kMatVecBias: return "matvec_bias";
    case Op::kConcat3: return "concat3";
    case Op::kRelu: return "relu";
    case Op::kSigmoid: return "sigmoid";
    case Op::kSlotCosines: return "slot_cosines";
    case Op::kScaledSoftmax: return "scaled_softmax";
    case Op::kWeightedSum: return "weighted_sum";
    case Op::kAdd: return "add";
    case Op::kMix: return "mix";
    case Op::kMixConst: return "mix_const";
    case Op::kSqL2Diff: return "sq_l2_diff";
    case Op::kKlDiv: return "kl_div";
    case Op::kReparam: return "reparam";
    case Op::kScale: return "scale";
    case Op::kAddScaled: return "add_scaled";
  }
  return "?";
}

std::span<const double> Tape::value(Id id) const {
  const Node& n = at(id);
  return {n.value.data(), n.value.size()};
}

double Tape::value_scalar(Id id) const {
  const Node& n = at(id);
  if (n.value.size() != 1) {
    throw std::invalid_argument("tape node is not a scalar");
  }
  return n.value[0];
}

Tape::Id Tape::constant(std::span<const double> value) {
  Node n;
  n.op = Op::kConstant;
  n.value.assign(value.begin(), value.end());
  return push(std::move(n));
}

Tape::Id Tape::constant_scalar(double value) {
  return constant(std::span(&value, 1));
}

Tape::Id Tape::param(std::span<const double> value, std::span<double> grad) {
  if (value.size() != grad.size()) {
    throw std::invalid_argument("param leaf: value/grad size mismatch");
  }
  Node n;
  n.op = Op::kParam;
  n.value.assign(value.begin(), value.end());
  n.pvalue = value.data();
  n.pgrad = grad.data();
  n.psize = grad.size();
  return push(std::move(n));
}

Tape::Id Tape::row(Id matrix, int r, int cols) {
  const Node& m = at(matrix);
  const auto d = static_cast<std::size_t>(cols);
  Node n;
  n.op = Op::kRow;
  n.a = matrix;
  n.rows = r;
  n.cols = cols;
  n.value.assign(m.value.begin() + static_cast<std::ptrdiff_t>(r * d),
                 m.value.begin() + static_cast<std::ptrdiff_t>((r + 1) * d));
  return push(std::move(n));
}

Tape::Id Tape::matvec_bias(Id w, int rows, int cols, Id x, Id b) {
  const Node& wn = at(w);
  const Node& xn = at(x);
  const Node& bn = at(b);
  const auto r = static_cast<std::size_t>(rows);
  const auto d = static_cast<std::size_t>(cols);
  if (xn.value.size() != d || bn.value.size() != r ||
      wn.value.size() != r * d) {
    throw std::invalid_argument("matvec_bias: shape mismatch");
  }
  Node n;
  n.op = Op::kMatVecBias;
  n.a = w;
  n.b = x;
  n.c = b;
  n.rows = rows;
  n.cols = cols;
  n.value.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    n.value[i] =
        kernels::dot(wn.value.data() + i * d, xn.value.data(), d) + bn.value[i];
  }
  return push(std::move(n));
}

Tape::Id Tape::concat3(Id a, Id b, Id c) {
  Node n;
  n.op = Op::kConcat3;
  n.a = a;
  n.b = b;
  n.c = c;
  n.value = at(a).value;
  n.value.insert(n.value.end(), at(b).value.begin(), at(b).value.end());
  n.value.insert(n.value.end(), at(c).value.begin(), at(c).value.end());
  return push(std::move(n));
}

Tape::Id Tape::relu(Id x) {
  Node n;
  n.op = Op::kRelu;
  n.a = x;
  n.value.resize(at(x).value.size());
  kernels::relu(at(x).value.data(), n.value.data(), n.value.size());
  return push(std::move(n));
}

Tape::Id Tape::sigmoid(Id x) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = x;
  n.value.resize(at(x).value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    const double v = at(x).value[i];
    n.value[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
  }
  return push(std::move(n));
}

Tape::Id Tape::slot_cosines(Id matrix, int nslots, int cols, Id query) {
  const Node& m = at(matrix);
  const Node& q = at(query);
  const auto k = static_cast<std::size_t>(nslots);
  const auto d = static_cast<std::size_t>(cols);
  if (q.value.size() != d || m.value.size() != k * d) {
    throw std::invalid_argument("slot_cosines: shape mismatch");
  }
  Node n;
  n.op = Op::kSlotCosines;
  n.a = matrix;
  n.b = query;
  n.rows = nslots;
  n.cols = cols;
  n.value.resize(k);
  // aux layout: [u_0..u_{k-1}, nm_0..nm_{k-1}, nq]
  n.aux.resize(2 * k + 1);
  const double nq =
      std::sqrt(kernels::dot(q.value.data(), q.value.data(), d));
  n.aux[2 * k] = nq;
  for (std::size_t i = 0; i < k; ++i) {
    const double* slot = m.value.data() + i * d;
    const double u = kernels::dot(q.value.data(), slot, d);
    const double nm = std::sqrt(kernels::dot(slot, slot, d));
    n.aux[i] = u;
    n.aux[k + i] = nm;
    n.value[i] = u / ((nq + kNormEpsilon) * (nm + kNormEpsilon));
  }
  return push(std::move(n));
}

Tape::Id Tape::scaled_softmax(Id x, double scale) {
  Node n;
  n.op = Op::kScaledSoftmax;
  n.a = x;
  n.c0 = scale;
  n.value = at(x).value;
  scaled_softmax_inplace(n.value, scale);
  return push(std::move(n));
}

Tape::Id Tape::weighted_sum(Id matrix, int nslots, int cols, Id w) {
  const Node& m = at(matrix);
  const Node& wn = at(w);
  const auto k = static_cast<std::size_t>(nslots);
  const auto d = static_cast<std::size_t>(cols);
  if (wn.value.size() != k || m.value.size() != k * d) {
    throw std::invalid_argument("weighted_sum: shape mismatch");
  }
  Node n;
  n.op = Op::kWeightedSum;
  n.a = matrix;
  n.b = w;
  n.rows = nslots;
  n.cols = cols;
  n.value.assign(d, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    kernels::axpy(wn.value[i], m.value.data() + i * d, n.value.data(), d);
  }
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  if (an.value.size() != bn.value.size()) {
    throw std::invalid_argument("add: size mismatch");
  }
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.value.resize(an.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    n.value[i] = an.value[i] + bn.value[i];
  }
  return push(std::move(n));
}

Tape::Id Tape::mix(Id alpha, Id x, Id y) {
  const Node& an = at(alpha);
  const Node& xn = at(x);
  const Node& yn = at(y);
  if (an.value.size() != 1) {
    throw std::invalid_argument("mix: alpha must be scalar");
  }
  if (xn.value.size() != yn.value.size()) {
    throw std::invalid_argument("mix: size mismatch");
  }
  Node n;
  n.op = Op::kMix;
  n.a = alpha;
  n.b = x;
  n.c = y;
  const double al = an.value[0];
  n.value.resize(xn.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    n.value[i] = al * xn.value[i] + (1.0 - al) * yn.value[i];
  }
  return push(std::move(n));
}

Tape::Id Tape::mix_const(double alpha, Id x, Id y) {
  const Node& xn = at(x);
  const Node& yn = at(y);
  if (xn.value.size() != yn.value.size()) {
    throw std::invalid_argument("mix_const: size mismatch");
  }
  Node n;
  n.op = Op::kMixConst;
  n.b = x;
  n.c = y;
  n.c0 = alpha;
  n.value.resize(xn.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    n.value[i] = alpha * xn.value[i] + (1.0 - alpha) * yn.value[i];
  }
  return push(std::move(n));
}

Tape::Id Tape::sq_l2_diff(Id a, Id b) {
  const Node& an = at(a);
  const Node& bn = at(b);
  if (an.value.size() != bn.value.size()) {
    throw std::invalid_argument("sq_l2_diff: size mismatch");
  }
  Node n;
  n.op = Op::kSqL2Diff;
  n.a = a;
  n.b = b;
  double acc = 0;
  for (std::size_t i = 0; i < an.value.size(); ++i) {
    const double d = an.value[i] - bn.value[i];
    acc += d * d;
  }
  n.value.assign(1, acc);
  return push(std::move(n));
}

Tape::Id Tape::kl_div(Id p, Id q) {
  const Node& pn = at(p);
  const Node& qn = at(q);
  if (pn.value.size() != qn.value.size()) {
    throw std::invalid_argument("kl_div: size mismatch");
  }
  Node n;
  n.op = Op::kKlDiv;
  n.a = p;
  n.b = q;
  double acc = 0;
  for (std::size_t i = 0; i < pn.value.size(); ++i) {
    const double pc = std::max(pn.value[i], kKlClamp);
    const double qc = std::max(qn.value[i], kKlClamp);
    acc += pc * (std::log(pc) - std::log(qc));
  }
  n.value.assign(1, acc);
  return push(std::move(n));
}

Tape::Id Tape::reparam(Id mu, Id logvar, double eps) {
  const Node& mn = at(mu);
  const Node& vn = at(logvar);
  if (mn.value.size() != 1 || vn.value.size() != 1) {
    throw std::invalid_argument("reparam: scalar inputs expected");
  }
  Node n;
  n.op = Op::kReparam;
  n.a = mu;
  n.b = logvar;
  n.c0 = eps;
  n.value.assign(1, mn.value[0] + std::exp(0.5 * vn.value[0]) * eps);
  return push(std::move(n));
}

Tape::Id Tape::scale(Id x, double c) {
  Node n;
  n.op = Op::kScale;
  n.a = x;
  n.c0 = c;
  n.value = at(x).value;
  for (double& v : n.value) v *= c;
  return push(std::move(n));
}

Tape::Id Tape::add_scaled(Id a, double ca, Id b, double cb) {
  const Node& an = at(a);
  const Node& bn = at(b);
  if (an.value.size() != bn.value.size()) {
    throw std::invalid_argument("add_scaled: size mismatch");
  }
  Node n;
  n.op = Op::kAddScaled;
  n.a = a;
  n.b = b;
  n.c0 = ca;
  n.c1 = cb;
  n.value.resize(an.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i) {
    n.value[i] = ca * an.value[i] + cb * bn.value[i];
  }
  return push(std::move(n));
}

void Tape::backward(Id loss) {
  Node& top = at(loss);
  if (top.value.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar");
  }
  for (Node& n : nodes_) n.adjoint.assign(n.value.size(), 0.0);
  top.adjoint[0] = 1.0;

  for (Id id = static_cast<Id>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = at(id);
    bool any = false;
    for (double g : n.adjoint) {
      if (g != 0.0) {
        any = true;
        break;
      }
    }
    if (!any) continue;
    const std::vector<double>& g = n.adjoint;

    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam:
        for (std::size_t i = 0; i < n.psize; ++i) n.pgrad[i] += g[i];
        break;
      case Op::kRow: {
        Node& m = at(n.a);
        const auto d = static_cast<std::size_t>(n.cols);
        double* dst = m.adjoint.data() + static_cast<std::size_t>(n.rows) * d;
        for (std::size_t i = 0; i < d; ++i) dst[i] += g[i];
        break;
      }
      case Op::kMatVecBias: {
        Node& w = at(n.a);
        Node& x = at(n.b);
        Node& b = at(n.c);
        const auto r = static_cast<std::size_t>(n.rows);
        const auto d = static_cast<std::size_t>(n.cols);
        for (std::size_t i = 0; i < r; ++i) {
          const double gi = g[i];
          if (gi == 0.0) continue;
          kernels::axpy(gi, x.value.data(), w.adjoint.data() + i * d, d);
          kernels::axpy(gi, w.value.data() + i * d, x.adjoint.data(), d);
          b.adjoint[i] += gi;
        }
        break;
      }
      case Op::kConcat3: {
        Node& a = at(n.a);
        Node& b = at(n.b);
        Node& c = at(n.c);
        std::size_t off = 0;
        for (Node* part : {&a, &b, &c}) {
          for (std::size_t i = 0; i < part->value.size(); ++i) {
            part->adjoint[i] += g[off + i];
          }
          off += part->value.size();
        }
        break;
      }
      case Op::kRelu: {
        Node& x = at(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (x.value[i] > 0.0) x.adjoint[i] += g[i];
        }
        break;
      }
      case Op::kSigmoid: {
        Node& x = at(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          x.adjoint[i] += g[i] * n.value[i] * (1.0 - n.value[i]);
        }
        break;
      }
      case Op::kSlotCosines: {
        Node& m = at(n.a);
        Node& q = at(n.b);
        const auto k = static_cast<std::size_t>(n.rows);
        const auto d = static_cast<std::size_t>(n.cols);
        const double nq = n.aux[2 * k];
        const double dq = nq + kNormEpsilon;
        for (std::size_t i = 0; i < k; ++i) {
          const double gi = g[i];
          if (gi == 0.0) continue;
          const double nm = n.aux[k + i];
          const double dm = nm + kNormEpsilon;
          const double s = n.value[i];
          const double* slot = m.value.data() + i * d;
          double* gslot = m.adjoint.data() + i * d;
          // d s / d q = slot/(dq*dm) - s*q/(nq*dq)
          kernels::axpy(gi / (dq * dm), slot, q.adjoint.data(), d);
          kernels::axpy(-gi * s / (nq * dq), q.value.data(), q.adjoint.data(),
                        d);
          // d s / d slot = q/(dq*dm) - s*slot/(nm*dm)
          kernels::axpy(gi / (dq * dm), q.value.data(), gslot, d);
          kernels::axpy(-gi * s / (nm * dm), slot, gslot, d);
        }
        break;
      }
      case Op::kScaledSoftmax: {
        Node& x = at(n.a);
        double dotgy = 0;
        for (std::size_t i = 0; i < g.size(); ++i) dotgy += g[i] * n.value[i];
        for (std::size_t i = 0; i < g.size(); ++i) {
          x.adjoint[i] += n.c0 * n.value[i] * (g[i] - dotgy);
        }
        break;
      }
      case Op::kWeightedSum: {
        Node& m = at(n.a);
        Node& w = at(n.b);
        const auto k = static_cast<std::size_t>(n.rows);
        const auto d = static_cast<std::size_t>(n.cols);
        for (std::size_t i = 0; i < k; ++i) {
          w.adjoint[i] += kernels::dot(m.value.data() + i * d, g.data(), d);
          kernels::axpy(w.value[i], g.data(), m.adjoint.data() + i * d, d);
        }
        break;
      }
      case Op::kAdd: {
        Node& a = at(n.a);
        Node& b = at(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          a.adjoint[i] += g[i];
          b.adjoint[i] += g[i];
        }
        break;
      }
      case Op::kMix: {
        Node& al = at(n.a);
        Node& x = at(n.b);
        Node& y = at(n.c);
        const double a = al.value[0];
        double ga = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga += g[i] * (x.value[i] - y.value[i]);
          x.adjoint[i] += a * g[i];
          y.adjoint[i] += (1.0 - a) * g[i];
        }
        al.adjoint[0] += ga;
        break;
      }
      case Op::kMixConst: {
        Node& x = at(n.b);
        Node& y = at(n.c);
        for (std::size_t i = 0; i < g.size(); ++i) {
          x.adjoint[i] += n.c0 * g[i];
          y.adjoint[i] += (1.0 - n.c0) * g[i];
        }
        break;
      }
      case Op::kSqL2Diff: {
        Node& a = at(n.a);
        Node& b = at(n.b);
        const double g0 = g[0];
        for (std::size_t i = 0; i < a.value.size(); ++i) {
          const double diff = a.value[i] - b.value[i];
          a.adjoint[i] += 2.0 * diff * g0;
          b.adjoint[i] -= 2.0 * diff * g0;
        }
        break;
      }
      case Op::kKlDiv: {
        Node& p = at(n.a);
        Node& q = at(n.b);
        const double g0 = g[0];
        for (std::size_t i = 0; i < p.value.size(); ++i) {
          const double pc = std::max(p.value[i], kKlClamp);
          const double qc = std::max(q.value[i], kKlClamp);
          if (p.value[i] > kKlClamp) {
            p.adjoint[i] += g0 * (std::log(pc) - std::log(qc) + 1.0);
          }
          if (q.value[i] > kKlClamp) {
            q.adjoint[i] += g0 * (-pc / qc);
          }
        }
        break;
      }
      case Op::kReparam: {
        Node& mu = at(n.a);
        Node& lv = at(n.b);
        mu.adjoint[0] += g[0];
        lv.adjoint[0] += g[0] * 0.5 * std::exp(0.5 * lv.value[0]) * n.c0;
        break;
      }
      case Op::kScale: {
        Node& x = at(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) {
          x.adjoint[i] += n.c0 * g[i];
        }
        break;
      }
      case Op::kAddScaled: {
        Node& a = at(n.a);
        Node& b = at(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
          a.adjoint[i] += n.c0 * g[i];
          b.adjoint[i] += n.c1 * g[i];
        }
        break;
      }
    }
  }
}

}  // namespace vattr
