#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rsmt/tensor.hpp"

namespace rsmt {
namespace ad {

// Handle to a node on a tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense tensors. Append-only, so creation order is a
// topological order; backward walks it in reverse. A tape is single-threaded;
// independent tapes may run on independent threads.
class Tape {
 public:
  // Leaves. Leaf gradients persist across backward() calls (they accumulate);
  // interior gradients are scratch and reset on every backward().
  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }
  Var constant(double v) { return leaf(Tensor::scalar(v), false); }

  const Tensor& val(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }
  // Gradient of a leaf after backward(). Zero tensor if never touched.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[static_cast<size_t>(v.id)].requires; }

  // elementwise, same shape
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);

  // scalar constants
  Var scale(Var a, double c);
  Var add_const(Var a, double c);

  // scalar-variable broadcast (s has size 1)
  Var bmul(Var a, Var s);
  Var badd(Var a, Var s);

  // (m,k)x(k,n)->(m,n); (m,k)x(k)->(m); (k)x(k,n)->(n)
  Var matmul(Var a, Var b);

  Var concat(const std::vector<Var>& parts);  // rank-1 inputs
  Var slice(Var a, int start, int len);       // rank-1
  Var row(Var a, int r);                      // rank-2 -> rank-1
  Var reshape(Var a, std::vector<int> shape);
  Var transpose2d(Var a);

  // elementwise unary
  Var sin_(Var a);
  Var cos_(Var a);
  Var exp_(Var a);
  Var log_(Var a);
  Var tanh_(Var a);
  Var sigmoid_(Var a);
  Var elu_(Var a);
  Var abs_(Var a);
  Var sqrt_(Var a);
  Var softplus_(Var a);
  Var atan2_(Var y, Var x);  // elementwise, same shape

  Var softmax(Var a);  // rank-1

  // x:(Cin,T), w:(Cout,Cin,K), b:(Cout) -> (Cout,Tout)
  Var conv1d(Var x, Var w, Var b, int stride, int pad);
  // x:(Cin,T), w:(Cin,Cout,K), b:(Cout) -> (Cout,(T-1)*stride-2*pad+K)
  Var conv1d_transpose(Var x, Var w, Var b, int stride, int pad);

  Var sum(Var a);
  Var mean(Var a);

  // composed helpers
  Var dot(Var a, Var b) { return sum(mul(a, b)); }
  Var mse(Var a, Var b) { return mean(square(sub(a, b))); }
  Var mae(Var a, Var b) { return mean(abs_(sub(a, b))); }
  Var square(Var a) { return mul(a, a); }
  Var neg(Var a) { return scale(a, -1.0); }

  // Seeds d(loss)=1 and propagates. Loss must be scalar (size 1); throws
  // NonScalarLoss otherwise. Repeated calls accumulate into leaf gradients.
  void backward(Var loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // lazily allocated
    bool requires = false;
    bool is_leaf = false;
    bool grad_live = false;
    std::vector<int> parents;
    std::function<void(Tape&, int self)> back;
  };

  int push(Tensor value, std::vector<int> parents,
           std::function<void(Tape&, int)> back);
  Tensor& grad_buf(int id);
  void accumulate(int id, const double* src, int n);

  const Tensor& v(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  const Tensor& g(int id) const { return nodes_[static_cast<size_t>(id)].grad; }

  std::vector<Node> nodes_;
};

// Standard LSTM cell composed from tape primitives so gradients flow to the
// input, both states, and all weights. Gate order in the fused weights is
// input, forget, cell candidate, output.
struct LstmWeights {
  Var w_x;  // (4H, X)
  Var w_h;  // (4H, H)
  Var b;    // (4H)
};
std::pair<Var, Var> lstm_cell(Tape& tape, Var x, Var h_prev, Var c_prev,
                              const LstmWeights& w);

}  // namespace ad
}  // namespace rsmt
