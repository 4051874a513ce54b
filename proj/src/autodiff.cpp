#include "cloze/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cloze/error.hpp"

namespace cloze::ad {

namespace {

void require(bool ok, Err kind, const char* what) {
  if (!ok) fail(kind, what);
}

bool is_vector(const Mat& m) { return m.rows() == 1 || m.cols() == 1; }

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

int Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::constant(Mat value) {
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return {this, push(std::move(n))};
}

Var Tape::parameter(int param_id, const Mat& value) {
  Node n;
  n.op = Op::Parameter;
  n.value = value;
  n.param_id = param_id;
  return {this, push(std::move(n))};
}

const Mat& Tape::value(Var v) const {
  return nodes_.at(static_cast<size_t>(v.id)).value;
}

#define CLOZE_AD_BINARY_PROLOGUE(a, b)                              \
  Tape* t = a.tape;                                                 \
  require(t != nullptr && t == b.tape, Err::ShapeMismatch,          \
          "operands on different tapes");                           \
  const Mat& va = t->nodes_[static_cast<size_t>(a.id)].value;       \
  const Mat& vb = t->nodes_[static_cast<size_t>(b.id)].value;

Var matmul(Var a, Var b) {
  CLOZE_AD_BINARY_PROLOGUE(a, b)
  require(va.cols() == vb.rows(), Err::ShapeMismatch, "matmul inner dims");
  Tape::Node n;
  n.op = Tape::Op::MatMul;
  n.in = {a.id, b.id};
  n.value = va * vb;
  return {t, t->push(std::move(n))};
}

Var transpose(Var a) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Tape::Op::Transpose;
  n.in = {a.id};
  n.value = t->nodes_[static_cast<size_t>(a.id)].value.transpose();
  return {t, t->push(std::move(n))};
}

Var add(Var a, Var b) {
  CLOZE_AD_BINARY_PROLOGUE(a, b)
  require(va.rows() == vb.rows() && va.cols() == vb.cols(), Err::ShapeMismatch,
          "add shapes differ");
  Tape::Node n;
  n.op = Tape::Op::Add;
  n.in = {a.id, b.id};
  n.value = va + vb;
  return {t, t->push(std::move(n))};
}

Var sub(Var a, Var b) {
  CLOZE_AD_BINARY_PROLOGUE(a, b)
  require(va.rows() == vb.rows() && va.cols() == vb.cols(), Err::ShapeMismatch,
          "sub shapes differ");
  Tape::Node n;
  n.op = Tape::Op::Sub;
  n.in = {a.id, b.id};
  n.value = va - vb;
  return {t, t->push(std::move(n))};
}

Var cmul(Var a, Var b) {
  CLOZE_AD_BINARY_PROLOGUE(a, b)
  require(va.rows() == vb.rows() && va.cols() == vb.cols(), Err::ShapeMismatch,
          "cmul shapes differ");
  Tape::Node n;
  n.op = Tape::Op::CMul;
  n.in = {a.id, b.id};
  n.value = va.cwiseProduct(vb);
  return {t, t->push(std::move(n))};
}

Var sigmoid(Var a) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Tape::Op::Sigmoid;
  n.in = {a.id};
  n.value = t->nodes_[static_cast<size_t>(a.id)].value.unaryExpr(
      [](double x) { return sigmoid_scalar(x); });
  return {t, t->push(std::move(n))};
}

Var tanh(Var a) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Tape::Op::Tanh;
  n.in = {a.id};
  n.value = t->nodes_[static_cast<size_t>(a.id)].value.array().tanh();
  return {t, t->push(std::move(n))};
}

Var vconcat(Var a, Var b) {
  CLOZE_AD_BINARY_PROLOGUE(a, b)
  require(va.cols() == vb.cols(), Err::ShapeMismatch, "vconcat column counts");
  Tape::Node n;
  n.op = Tape::Op::VConcat;
  n.in = {a.id, b.id};
  n.value.resize(va.rows() + vb.rows(), va.cols());
  n.value.topRows(va.rows()) = va;
  n.value.bottomRows(vb.rows()) = vb;
  return {t, t->push(std::move(n))};
}

Var hconcat(Var a, Var b) {
  CLOZE_AD_BINARY_PROLOGUE(a, b)
  require(va.rows() == vb.rows(), Err::ShapeMismatch, "hconcat row counts");
  Tape::Node n;
  n.op = Tape::Op::HConcat;
  n.in = {a.id, b.id};
  n.value.resize(va.rows(), va.cols() + vb.cols());
  n.value.leftCols(va.cols()) = va;
  n.value.rightCols(vb.cols()) = vb;
  return {t, t->push(std::move(n))};
}

Var stack_rows(const std::vector<Var>& rows) {
  require(!rows.empty(), Err::ShapeMismatch, "stack_rows of nothing");
  Tape* t = rows.front().tape;
  Tape::Node n;
  n.op = Tape::Op::StackRows;
  Eigen::Index cols = t->nodes_[static_cast<size_t>(rows[0].id)].value.cols();
  n.value.resize(static_cast<Eigen::Index>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].tape == t, Err::ShapeMismatch, "rows on different tapes");
    const Mat& v = t->nodes_[static_cast<size_t>(rows[i].id)].value;
    require(v.rows() == 1 && v.cols() == cols, Err::ShapeMismatch,
            "stack_rows wants equal-width row vectors");
    n.value.row(static_cast<Eigen::Index>(i)) = v;
    n.in.push_back(rows[i].id);
  }
  return {t, t->push(std::move(n))};
}

Var lookup_rows(Var table, std::vector<int> rows) {
  Tape* t = table.tape;
  const Mat& v = t->nodes_[static_cast<size_t>(table.id)].value;
  Tape::Node n;
  n.op = Tape::Op::LookupRows;
  n.in = {table.id};
  n.value.resize(static_cast<Eigen::Index>(rows.size()), v.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < v.rows(), Err::ShapeMismatch,
            "lookup row out of range");
    n.value.row(static_cast<Eigen::Index>(i)) = v.row(rows[i]);
  }
  n.idx = std::move(rows);
  return {t, t->push(std::move(n))};
}

Var row(Var m, int i) {
  Tape* t = m.tape;
  const Mat& v = t->nodes_[static_cast<size_t>(m.id)].value;
  require(i >= 0 && i < v.rows(), Err::ShapeMismatch, "row out of range");
  Tape::Node n;
  n.op = Tape::Op::Row;
  n.in = {m.id};
  n.idx = {i};
  n.value = v.row(i);
  return {t, t->push(std::move(n))};
}

Var masked_softmax(Var logits, std::vector<uint8_t> mask) {
  Tape* t = logits.tape;
  const Mat& v = t->nodes_[static_cast<size_t>(logits.id)].value;
  require(is_vector(v), Err::ShapeMismatch, "softmax input must be a vector");
  size_t n_pos = static_cast<size_t>(v.size());
  if (mask.empty()) mask.assign(n_pos, 1);
  require(mask.size() == n_pos, Err::ShapeMismatch, "mask length mismatch");

  double max_logit = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n_pos; ++i) {
    if (mask[i]) max_logit = std::max(max_logit, v(static_cast<Eigen::Index>(i)));
  }
  if (!std::isfinite(max_logit)) {
    fail(Err::EmptyUnmaskedSet, "softmax with every position masked");
  }

  Tape::Node n;
  n.op = Tape::Op::MaskedSoftmax;
  n.in = {logits.id};
  n.value = Mat::Zero(v.rows(), v.cols());
  double denom = 0;
  for (size_t i = 0; i < n_pos; ++i) {
    if (!mask[i]) continue;
    double e = std::exp(v(static_cast<Eigen::Index>(i)) - max_logit);
    n.value(static_cast<Eigen::Index>(i)) = e;
    denom += e;
  }
  n.value /= denom;
  n.mask = std::move(mask);
  return {t, t->push(std::move(n))};
}

Var pick(Var v, int index) {
  Tape* t = v.tape;
  const Mat& val = t->nodes_[static_cast<size_t>(v.id)].value;
  require(is_vector(val), Err::ShapeMismatch, "pick input must be a vector");
  require(index >= 0 && index < val.size(), Err::ShapeMismatch,
          "pick index out of range");
  Tape::Node n;
  n.op = Tape::Op::Pick;
  n.in = {v.id};
  n.idx = {index};
  n.value.resize(1, 1);
  n.value(0, 0) = val(index);
  return {t, t->push(std::move(n))};
}

Var log(Var a) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Tape::Op::Log;
  n.in = {a.id};
  n.value = t->nodes_[static_cast<size_t>(a.id)].value.array().log();
  return {t, t->push(std::move(n))};
}

Var neg(Var a) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Tape::Op::Neg;
  n.in = {a.id};
  n.value = -t->nodes_[static_cast<size_t>(a.id)].value;
  return {t, t->push(std::move(n))};
}

Var scale(Var a, double s) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Tape::Op::Scale;
  n.in = {a.id};
  n.scalar = s;
  n.value = s * t->nodes_[static_cast<size_t>(a.id)].value;
  return {t, t->push(std::move(n))};
}

GradientSet Tape::backward(Var scalar_output, int n_params) {
  const Mat& out_val = value(scalar_output);
  if (out_val.rows() != 1 || out_val.cols() != 1) {
    fail(Err::NonScalarOutput, "backward from a non-scalar value");
  }

  std::vector<Mat> grads(nodes_.size());
  auto grad_of = [&](int id) -> Mat& {
    Mat& g = grads[static_cast<size_t>(id)];
    if (g.size() == 0) {
      const Mat& v = nodes_[static_cast<size_t>(id)].value;
      g = Mat::Zero(v.rows(), v.cols());
    }
    return g;
  };
  grad_of(scalar_output.id)(0, 0) = 1.0;

  for (int id = scalar_output.id; id >= 0; --id) {
    const Node& node = nodes_[static_cast<size_t>(id)];
    Mat& g = grads[static_cast<size_t>(id)];
    if (g.size() == 0) continue;  // not on the path to the output

    switch (node.op) {
      case Op::Constant:
      case Op::Parameter:
        break;
      case Op::MatMul: {
        const Mat& a = nodes_[static_cast<size_t>(node.in[0])].value;
        const Mat& b = nodes_[static_cast<size_t>(node.in[1])].value;
        grad_of(node.in[0]).noalias() += g * b.transpose();
        grad_of(node.in[1]).noalias() += a.transpose() * g;
        break;
      }
      case Op::Transpose:
        grad_of(node.in[0]) += g.transpose();
        break;
      case Op::Add:
        grad_of(node.in[0]) += g;
        grad_of(node.in[1]) += g;
        break;
      case Op::Sub:
        grad_of(node.in[0]) += g;
        grad_of(node.in[1]) -= g;
        break;
      case Op::CMul: {
        const Mat& a = nodes_[static_cast<size_t>(node.in[0])].value;
        const Mat& b = nodes_[static_cast<size_t>(node.in[1])].value;
        grad_of(node.in[0]) += g.cwiseProduct(b);
        grad_of(node.in[1]) += g.cwiseProduct(a);
        break;
      }
      case Op::Sigmoid: {
        const Mat& y = node.value;
        grad_of(node.in[0]) +=
            g.cwiseProduct(y.cwiseProduct(Mat::Ones(y.rows(), y.cols()) - y));
        break;
      }
      case Op::Tanh: {
        const Mat& y = node.value;
        grad_of(node.in[0]) +=
            g.cwiseProduct(Mat::Ones(y.rows(), y.cols()) - y.cwiseProduct(y));
        break;
      }
      case Op::VConcat: {
        Eigen::Index top = nodes_[static_cast<size_t>(node.in[0])].value.rows();
        grad_of(node.in[0]) += g.topRows(top);
        grad_of(node.in[1]) += g.bottomRows(g.rows() - top);
        break;
      }
      case Op::HConcat: {
        Eigen::Index left = nodes_[static_cast<size_t>(node.in[0])].value.cols();
        grad_of(node.in[0]) += g.leftCols(left);
        grad_of(node.in[1]) += g.rightCols(g.cols() - left);
        break;
      }
      case Op::StackRows:
        for (size_t i = 0; i < node.in.size(); ++i) {
          grad_of(node.in[i]) += g.row(static_cast<Eigen::Index>(i));
        }
        break;
      case Op::LookupRows: {
        Mat& gt = grad_of(node.in[0]);
        for (size_t i = 0; i < node.idx.size(); ++i) {
          gt.row(node.idx[i]) += g.row(static_cast<Eigen::Index>(i));
        }
        break;
      }
      case Op::Row:
        grad_of(node.in[0]).row(node.idx[0]) += g;
        break;
      case Op::MaskedSoftmax: {
        const Mat& y = node.value;
        double weighted = g.cwiseProduct(y).sum();
        Mat& gin = grad_of(node.in[0]);
        for (Eigen::Index i = 0; i < y.size(); ++i) {
          if (node.mask[static_cast<size_t>(i)]) {
            gin(i) += y(i) * (g(i) - weighted);
          }
        }
        break;
      }
      case Op::Pick:
        grad_of(node.in[0])(node.idx[0]) += g(0, 0);
        break;
      case Op::Log: {
        const Mat& x = nodes_[static_cast<size_t>(node.in[0])].value;
        grad_of(node.in[0]) += g.cwiseQuotient(x);
        break;
      }
      case Op::Neg:
        grad_of(node.in[0]) -= g;
        break;
      case Op::Scale:
        grad_of(node.in[0]) += node.scalar * g;
        break;
    }
  }

  GradientSet out(static_cast<size_t>(n_params));
  for (size_t id = 0; id < nodes_.size(); ++id) {
    const Node& node = nodes_[id];
    if (node.op != Op::Parameter || grads[id].size() == 0) continue;
    Mat& slot = out[static_cast<size_t>(node.param_id)];
    if (slot.size() == 0) {
      slot = std::move(grads[id]);
    } else {
      slot += grads[id];  // same parameter bound more than once
    }
  }
  return out;
}

double grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const std::vector<Mat>& at, double epsilon) {
  int n_params = static_cast<int>(at.size());

  auto evaluate = [&](const std::vector<Mat>& point) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(point.size());
    for (size_t i = 0; i < point.size(); ++i) {
      vars.push_back(tape.parameter(static_cast<int>(i), point[i]));
    }
    Var out = build(tape, vars);
    return tape.value(out)(0, 0);
  };

  Tape tape;
  std::vector<Var> vars;
  for (size_t i = 0; i < at.size(); ++i) {
    vars.push_back(tape.parameter(static_cast<int>(i), at[i]));
  }
  Var out = build(tape, vars);
  GradientSet analytic = tape.backward(out, n_params);

  double worst = 0;
  std::vector<Mat> point = at;
  for (size_t p = 0; p < at.size(); ++p) {
    for (Eigen::Index i = 0; i < at[p].size(); ++i) {
      double saved = point[p](i);
      point[p](i) = saved + epsilon;
      double plus = evaluate(point);
      point[p](i) = saved - epsilon;
      double minus = evaluate(point);
      point[p](i) = saved;

      double numeric = (plus - minus) / (2 * epsilon);
      double a = analytic[p].size() ? analytic[p](i) : 0.0;
      double rel = std::abs(a - numeric) /
                   std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

double global_norm(const GradientSet& grads) {
  double sq = 0;
  for (const Mat& g : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

GradientSet clip_global_norm(GradientSet grads, double threshold) {
  double norm = global_norm(grads);
  if (norm > threshold) {
    double factor = threshold / norm;
    for (Mat& g : grads) g *= factor;
  }
  return grads;
}

void sgd_step(const std::vector<Mat*>& params, const GradientSet& grads,
              double learning_rate) {
  if (params.size() != grads.size()) {
    fail(Err::ShapeMismatch, "parameter/gradient count mismatch");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() == 0) continue;
    if (grads[i].rows() != params[i]->rows() ||
        grads[i].cols() != params[i]->cols()) {
      fail(Err::ShapeMismatch, "gradient shape mismatch at parameter " +
                                   std::to_string(i));
    }
    *params[i] -= learning_rate * grads[i];
  }
}

void accumulate(GradientSet& into, const GradientSet& grads) {
  if (into.size() < grads.size()) into.resize(grads.size());
  for (size_t i = 0; i < grads.size(); ++i) {
    if (grads[i].size() == 0) continue;
    if (into[i].size() == 0) {
      into[i] = grads[i];
    } else {
      into[i] += grads[i];
    }
  }
}

void scale_gradients(GradientSet& grads, double factor) {
  for (Mat& g : grads) g *= factor;
}

}  // namespace cloze::ad
