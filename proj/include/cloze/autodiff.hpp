#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace cloze::ad {

// Row-major so serialized parameter bytes match the declared layout.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Gradients aligned with parameter ids; an empty Mat means the parameter
// never appeared on the tape.
using GradientSet = std::vector<Mat>;

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

// Record of primitive operations in construction (= topological) order.
// backward() walks it once in reverse from a scalar output.
class Tape {
 public:
  Var constant(Mat value);
  Var parameter(int param_id, const Mat& value);

  const Mat& value(Var v) const;
  GradientSet backward(Var scalar_output, int n_params);

  void reset() { nodes_.clear(); }
  size_t size() const { return nodes_.size(); }

 private:
  friend Var matmul(Var, Var);
  friend Var transpose(Var);
  friend Var add(Var, Var);
  friend Var sub(Var, Var);
  friend Var cmul(Var, Var);
  friend Var sigmoid(Var);
  friend Var tanh(Var);
  friend Var vconcat(Var, Var);
  friend Var hconcat(Var, Var);
  friend Var stack_rows(const std::vector<Var>&);
  friend Var lookup_rows(Var, std::vector<int>);
  friend Var row(Var, int);
  friend Var masked_softmax(Var, std::vector<uint8_t>);
  friend Var pick(Var, int);
  friend Var log(Var);
  friend Var neg(Var);
  friend Var scale(Var, double);

  enum class Op {
    Constant,
    Parameter,
    MatMul,
    Transpose,
    Add,
    Sub,
    CMul,
    Sigmoid,
    Tanh,
    VConcat,
    HConcat,
    StackRows,
    LookupRows,
    Row,
    MaskedSoftmax,
    Pick,
    Log,
    Neg,
    Scale,
  };

  struct Node {
    Op op;
    std::vector<int> in;
    Mat value;
    std::vector<int> idx;        // LookupRows rows, Row/Pick index
    std::vector<uint8_t> mask;   // MaskedSoftmax
    double scalar = 0;           // Scale
    int param_id = -1;
  };

  int push(Node node);
  std::vector<Node> nodes_;
};

// Primitives; every Var must live on the same tape.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var cmul(Var a, Var b);  // elementwise
Var sigmoid(Var a);
Var tanh(Var a);
Var vconcat(Var a, Var b);  // [a; b]
Var hconcat(Var a, Var b);  // [a, b]
Var stack_rows(const std::vector<Var>& rows);  // k row vectors -> k x n
Var lookup_rows(Var table, std::vector<int> rows);  // embedding lookup
Var row(Var m, int i);
// Probability distribution over unmasked positions; masked ones are exactly
// zero. An empty mask means every position is active.
Var masked_softmax(Var logits, std::vector<uint8_t> mask);
// Inverted-dropout application: mask entries are 0 or 1/keep_p.
inline Var apply_dropout_mask(Var a, Var mask) { return cmul(a, mask); }
Var pick(Var v, int index);
Var log(Var a);
Var neg(Var a);
Var scale(Var a, double s);

// Central-difference check of a scalar tape program against its own
// backward pass; returns the max relative error |a-n| / max(|a|,|n|,1e-8).
double grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    const std::vector<Mat>& at, double epsilon);

double global_norm(const GradientSet& grads);
// Rescales all gradients to norm <= threshold, preserving direction.
GradientSet clip_global_norm(GradientSet grads, double threshold);
void sgd_step(const std::vector<Mat*>& params, const GradientSet& grads,
              double learning_rate);
void accumulate(GradientSet& into, const GradientSet& grads);
void scale_gradients(GradientSet& grads, double factor);

}  // namespace cloze::ad
