#include "rsmt/tape.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "rsmt/errors.hpp"

namespace rsmt {
namespace ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using CMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using CVecMap = Eigen::Map<const Eigen::VectorXd>;

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

int Tape::push(Tensor value, std::vector<int> parents,
               std::function<void(Tape&, int)> back) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.back = std::move(back);
  for (int p : n.parents) {
    if (nodes_[static_cast<size_t>(p)].requires) {
      n.requires = true;
      break;
    }
  }
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires = requires_grad;
  n.is_leaf = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[static_cast<size_t>(v.id)];
  if (n.grad_live) return n.grad;
  return Tensor::zeros(n.value.shape);
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (!n.grad_live) {
    n.grad = Tensor::zeros(n.value.shape);
    n.grad_live = true;
  }
  return n.grad;
}

void Tape::accumulate(int id, const double* src, int n) {
  Tensor& gb = grad_buf(id);
  for (int i = 0; i < n; ++i) gb.data[static_cast<size_t>(i)] += src[i];
}

Var Tape::add(Var a, Var b) {
  const Tensor& ta = v(a.id);
  const Tensor& tb = v(b.id);
  check_same_shape(ta, tb, "add");
  Tensor out = ta;
  for (int i = 0; i < out.size(); ++i) out[i] += tb[i];
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), {ai, bi}, [ai, bi](Tape& t, int self) {
    const Tensor& g = t.g(self);
    if (t.nodes_[static_cast<size_t>(ai)].requires) t.accumulate(ai, g.data.data(), g.size());
    if (t.nodes_[static_cast<size_t>(bi)].requires) t.accumulate(bi, g.data.data(), g.size());
  })};
}

Var Tape::sub(Var a, Var b) {
  const Tensor& ta = v(a.id);
  const Tensor& tb = v(b.id);
  check_same_shape(ta, tb, "sub");
  Tensor out = ta;
  for (int i = 0; i < out.size(); ++i) out[i] -= tb[i];
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), {ai, bi}, [ai, bi](Tape& t, int self) {
    const Tensor& g = t.g(self);
    if (t.nodes_[static_cast<size_t>(ai)].requires) t.accumulate(ai, g.data.data(), g.size());
    if (t.nodes_[static_cast<size_t>(bi)].requires) {
      Tensor& gb = t.grad_buf(bi);
      for (int i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  })};
}

Var Tape::mul(Var a, Var b) {
  const Tensor& ta = v(a.id);
  const Tensor& tb = v(b.id);
  check_same_shape(ta, tb, "mul");
  Tensor out = ta;
  for (int i = 0; i < out.size(); ++i) out[i] *= tb[i];
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), {ai, bi}, [ai, bi](Tape& t, int self) {
    const Tensor& g = t.g(self);
    const Tensor& va = t.v(ai);
    const Tensor& vb = t.v(bi);
    if (t.nodes_[static_cast<size_t>(ai)].requires) {
      Tensor& ga = t.grad_buf(ai);
      for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (t.nodes_[static_cast<size_t>(bi)].requires) {
      Tensor& gb = t.grad_buf(bi);
      for (int i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  })};
}

Var Tape::scale(Var a, double c) {
  Tensor out = v(a.id);
  for (double& x : out.data) x *= c;
  int ai = a.id;
  return Var{push(std::move(out), {ai}, [ai, c](Tape& t, int self) {
    const Tensor& g = t.g(self);
    if (!t.nodes_[static_cast<size_t>(ai)].requires) return;
    Tensor& ga = t.grad_buf(ai);
    for (int i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  })};
}

Var Tape::add_const(Var a, double c) {
  Tensor out = v(a.id);
  for (double& x : out.data) x += c;
  int ai = a.id;
  return Var{push(std::move(out), {ai}, [ai](Tape& t, int self) {
    const Tensor& g = t.g(self);
    if (t.nodes_[static_cast<size_t>(ai)].requires) t.accumulate(ai, g.data.data(), g.size());
  })};
}

Var Tape::bmul(Var a, Var s) {
  const Tensor& ts = v(s.id);
  if (ts.size() != 1) throw ShapeError("bmul scalar has shape " + ts.shape_str());
  double sv = ts[0];
  Tensor out = v(a.id);
  for (double& x : out.data) x *= sv;
  int ai = a.id, si = s.id;
  return Var{push(std::move(out), {ai, si}, [ai, si](Tape& t, int self) {
    const Tensor& g = t.g(self);
    const Tensor& va = t.v(ai);
    double sv2 = t.v(si)[0];
    if (t.nodes_[static_cast<size_t>(ai)].requires) {
      Tensor& ga = t.grad_buf(ai);
      for (int i = 0; i < g.size(); ++i) ga[i] += sv2 * g[i];
    }
    if (t.nodes_[static_cast<size_t>(si)].requires) {
      double acc = 0.0;
      for (int i = 0; i < g.size(); ++i) acc += g[i] * va[i];
      t.grad_buf(si)[0] += acc;
    }
  })};
}

Var Tape::badd(Var a, Var s) {
  const Tensor& ts = v(s.id);
  if (ts.size() != 1) throw ShapeError("badd scalar has shape " + ts.shape_str());
  double sv = ts[0];
  Tensor out = v(a.id);
  for (double& x : out.data) x += sv;
  int ai = a.id, si = s.id;
  return Var{push(std::move(out), {ai, si}, [ai, si](Tape& t, int self) {
    const Tensor& g = t.g(self);
    if (t.nodes_[static_cast<size_t>(ai)].requires) t.accumulate(ai, g.data.data(), g.size());
    if (t.nodes_[static_cast<size_t>(si)].requires) {
      double acc = 0.0;
      for (int i = 0; i < g.size(); ++i) acc += g[i];
      t.grad_buf(si)[0] += acc;
    }
  })};
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& ta = v(a.id);
  const Tensor& tb = v(b.id);
  int m, k, n;
  bool a_vec = ta.rank() == 1;
  bool b_vec = tb.rank() == 1;
  if (ta.rank() == 2 && tb.rank() == 2) {
    m = ta.dim(0), k = ta.dim(1), n = tb.dim(1);
    if (tb.dim(0) != k) throw ShapeError("matmul: " + ta.shape_str() + " x " + tb.shape_str());
  } else if (ta.rank() == 2 && b_vec) {
    m = ta.dim(0), k = ta.dim(1), n = 1;
    if (tb.dim(0) != k) throw ShapeError("matmul: " + ta.shape_str() + " x " + tb.shape_str());
  } else if (a_vec && tb.rank() == 2) {
    m = 1, k = ta.dim(0), n = tb.dim(1);
    if (tb.dim(0) != k) throw ShapeError("matmul: " + ta.shape_str() + " x " + tb.shape_str());
  } else {
    throw ShapeError("matmul ranks: " + ta.shape_str() + " x " + tb.shape_str());
  }
  std::vector<int> out_shape;
  if (a_vec)
    out_shape = {n};
  else if (b_vec)
    out_shape = {m};
  else
    out_shape = {m, n};
  Tensor out(out_shape);
  {
    CMatMap ma(ta.data.data(), m, k);
    CMatMap mb(tb.data.data(), k, n);
    MatMap mo(out.data.data(), m, n);
    mo.noalias() = ma * mb;
  }
  int ai = a.id, bi = b.id;
  return Var{push(std::move(out), {ai, bi}, [ai, bi, m, k, n](Tape& t, int self) {
    const Tensor& g = t.g(self);
    const Tensor& va = t.v(ai);
    const Tensor& vb = t.v(bi);
    CMatMap mg(g.data.data(), m, n);
    CMatMap ma(va.data.data(), m, k);
    CMatMap mb(vb.data.data(), k, n);
    if (t.nodes_[static_cast<size_t>(ai)].requires) {
      MatMap ga(t.grad_buf(ai).data.data(), m, k);
      ga.noalias() += mg * mb.transpose();
    }
    if (t.nodes_[static_cast<size_t>(bi)].requires) {
      MatMap gb(t.grad_buf(bi).data.data(), k, n);
      gb.noalias() += ma.transpose() * mg;
    }
  })};
}

Var Tape::concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat of zero parts");
  int total = 0;
  std::vector<int> ids;
  std::vector<int> sizes;
  for (Var p : parts) {
    const Tensor& tp = v(p.id);
    if (tp.rank() != 1) throw ShapeError("concat expects rank-1, got " + tp.shape_str());
    total += tp.size();
    ids.push_back(p.id);
    sizes.push_back(tp.size());
  }
  Tensor out({total});
  int off = 0;
  for (size_t i = 0; i < ids.size(); ++i) {
    const Tensor& tp = v(ids[i]);
    std::copy(tp.data.begin(), tp.data.end(), out.data.begin() + off);
    off += sizes[i];
  }
  std::vector<int> parents = ids;
  return Var{push(std::move(out), parents, [ids, sizes](Tape& t, int self) {
    const Tensor& g = t.g(self);
    int off2 = 0;
    for (size_t i = 0; i < ids.size(); ++i) {
      if (t.nodes_[static_cast<size_t>(ids[i])].requires) {
        t.accumulate(ids[i], g.data.data() + off2, sizes[i]);
      }
      off2 += sizes[i];
    }
  })};
}

Var Tape::slice(Var a, int start, int len) {
  const Tensor& ta = v(a.id);
  if (ta.rank() != 1) throw ShapeError("slice expects rank-1, got " + ta.shape_str());
  if (start < 0 || len <= 0 || start + len > ta.size()) {
    throw ShapeError("slice [" + std::to_string(start) + "," + std::to_string(start + len) +
                     ") of length-" + std::to_string(ta.size()) + " vector");
  }
  Tensor out({len});
  std::copy(ta.data.begin() + start, ta.data.begin() + start + len, out.data.begin());
  int ai = a.id;
  return Var{push(std::move(out), {ai}, [ai, start, len](Tape& t, int self) {
    if (!t.nodes_[static_cast<size_t>(ai)].requires) return;
    const Tensor& g = t.g(self);
    Tensor& ga = t.grad_buf(ai);
    for (int i = 0; i < len; ++i) ga[start + i] += g[i];
  })};
}

Var Tape::row(Var a, int r) {
  const Tensor& ta = v(a.id);
  if (ta.rank() != 2) throw ShapeError("row expects rank-2, got " + ta.shape_str());
  if (r < 0 || r >= ta.dim(0)) throw ShapeError("row index out of range");
  int cols = ta.dim(1);
  Tensor out({cols});
  std::copy(ta.data.begin() + static_cast<size_t>(r) * cols,
            ta.data.begin() + static_cast<size_t>(r + 1) * cols, out.data.begin());
  int ai = a.id;
  return Var{push(std::move(out), {ai}, [ai, r, cols](Tape& t, int self) {
    if (!t.nodes_[static_cast<size_t>(ai)].requires) return;
    const Tensor& g = t.g(self);
    Tensor& ga = t.grad_buf(ai);
    for (int i = 0; i < cols; ++i) ga[r * cols + i] += g[i];
  })};
}

Var Tape::reshape(Var a, std::vector<int> shape) {
  const Tensor& ta = v(a.id);
  if (shape_size(shape) != ta.size()) {
    throw ShapeError("reshape " + ta.shape_str() + " -> " + shape_to_string(shape));
  }
  Tensor out(shape, ta.data);
  int ai = a.id;
  return Var{push(std::move(out), {ai}, [ai](Tape& t, int self) {
    const Tensor& g = t.g(self);
    if (t.nodes_[static_cast<size_t>(ai)].requires) t.accumulate(ai, g.data.data(), g.size());
  })};
}

Var Tape::transpose2d(Var a) {
  const Tensor& ta = v(a.id);
  if (ta.rank() != 2) throw ShapeError("transpose2d expects rank-2, got " + ta.shape_str());
  int r = ta.dim(0), c = ta.dim(1);
  Tensor out({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out.at(j, i) = ta.at(i, j);
  int ai = a.id;
  return Var{push(std::move(out), {ai}, [ai, r, c](Tape& t, int self) {
    if (!t.nodes_[static_cast<size_t>(ai)].requires) return;
    const Tensor& g = t.g(self);
    Tensor& ga = t.grad_buf(ai);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) ga.data[static_cast<size_t>(i * c + j)] += g.at(j, i);
  })};
}

#define RSMT_UNARY(NAME, FWD, BWD)                                                 \
  Var Tape::NAME(Var a) {                                                          \
    const Tensor& ta = v(a.id);                                                    \
    Tensor out = ta;                                                               \
    for (double& x : out.data) x = FWD(x);                                         \
    int ai = a.id;                                                                 \
    return Var{push(std::move(out), {ai}, [ai](Tape& t, int self) {                \
      if (!t.nodes_[static_cast<size_t>(ai)].requires) return;                     \
      const Tensor& g = t.g(self);                                                 \
      const Tensor& in = t.v(ai);                                                  \
      const Tensor& outv = t.v(self);                                              \
      Tensor& ga = t.grad_buf(ai);                                                 \
      for (int i = 0; i < g.size(); ++i) {                                         \
        double x = in[i];                                                          \
        double y = outv[i];                                                        \
        (void)x;                                                                   \
        (void)y;                                                                   \
        ga[i] += g[i] * (BWD);                                                     \
      }                                                                            \
    })};                                                                           \
  }

RSMT_UNARY(sin_, std::sin, std::cos(x))
RSMT_UNARY(cos_, std::cos, -std::sin(x))
RSMT_UNARY(exp_, std::exp, y)
RSMT_UNARY(log_, std::log, 1.0 / x)
RSMT_UNARY(tanh_, std::tanh, 1.0 - y * y)
RSMT_UNARY(sigmoid_, [](double t) { return 1.0 / (1.0 + std::exp(-t)); }, y*(1.0 - y))
RSMT_UNARY(elu_, [](double t) { return t > 0.0 ? t : std::expm1(t); }, x > 0.0 ? 1.0 : y + 1.0)
RSMT_UNARY(abs_, std::abs, x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0))
RSMT_UNARY(sqrt_, std::sqrt, y > 0.0 ? 0.5 / y : 0.0)
RSMT_UNARY(softplus_, [](double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); },
           1.0 / (1.0 + std::exp(-x)))

#undef RSMT_UNARY

Var Tape::atan2_(Var y, Var x) {
  const Tensor& ty = v(y.id);
  const Tensor& tx = v(x.id);
  check_same_shape(ty, tx, "atan2");
  Tensor out = ty;
  for (int i = 0; i < out.size(); ++i) out[i] = std::atan2(ty[i], tx[i]);
  int yi = y.id, xi = x.id;
  return Var{push(std::move(out), {yi, xi}, [yi, xi](Tape& t, int self) {
    const Tensor& g = t.g(self);
    const Tensor& vy = t.v(yi);
    const Tensor& vx = t.v(xi);
    if (t.nodes_[static_cast<size_t>(yi)].requires) {
      Tensor& gy = t.grad_buf(yi);
      for (int i = 0; i < g.size(); ++i) {
        double d = vx[i] * vx[i] + vy[i] * vy[i];
        if (d > 0.0) gy[i] += g[i] * vx[i] / d;
      }
    }
    if (t.nodes_[static_cast<size_t>(xi)].requires) {
      Tensor& gx = t.grad_buf(xi);
      for (int i = 0; i < g.size(); ++i) {
        double d = vx[i] * vx[i] + vy[i] * vy[i];
        if (d > 0.0) gx[i] -= g[i] * vy[i] / d;
      }
    }
  })};
}

Var Tape::softmax(Var a) {
  const Tensor& ta = v(a.id);
  if (ta.rank() != 1) throw ShapeError("softmax expects rank-1, got " + ta.shape_str());
  Tensor out = ta;
  double mx = out[0];
  for (double x : out.data) mx = std::max(mx, x);
  double total = 0.0;
  for (double& x : out.data) {
    x = std::exp(x - mx);
    total += x;
  }
  for (double& x : out.data) x /= total;
  int ai = a.id;
  return Var{push(std::move(out), {ai}, [ai](Tape& t, int self) {
    if (!t.nodes_[static_cast<size_t>(ai)].requires) return;
    const Tensor& g = t.g(self);
    const Tensor& y = t.v(self);
    double gy = 0.0;
    for (int i = 0; i < g.size(); ++i) gy += g[i] * y[i];
    Tensor& ga = t.grad_buf(ai);
    for (int i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - gy);
  })};
}

Var Tape::conv1d(Var x, Var w, Var b, int stride, int pad) {
  const Tensor& tx = v(x.id);
  const Tensor& tw = v(w.id);
  const Tensor& tb = v(b.id);
  if (tx.rank() != 2 || tw.rank() != 3 || tb.rank() != 1) {
    throw ShapeError("conv1d shapes: x" + tx.shape_str() + " w" + tw.shape_str() + " b" +
                     tb.shape_str());
  }
  int cin = tx.dim(0), tlen = tx.dim(1);
  int cout = tw.dim(0), k = tw.dim(2);
  if (tw.dim(1) != cin || tb.dim(0) != cout) {
    throw ShapeError("conv1d channel mismatch: x" + tx.shape_str() + " w" + tw.shape_str());
  }
  int tout = (tlen + 2 * pad - k) / stride + 1;
  if (tout <= 0) throw ShapeError("conv1d output length nonpositive");
  Tensor out({cout, tout});
  for (int co = 0; co < cout; ++co) {
    for (int to = 0; to < tout; ++to) {
      double acc = tb[co];
      for (int ci = 0; ci < cin; ++ci) {
        for (int kk = 0; kk < k; ++kk) {
          int ti = to * stride + kk - pad;
          if (ti < 0 || ti >= tlen) continue;
          acc += tx.at(ci, ti) * tw.at(co, ci, kk);
        }
      }
      out.at(co, to) = acc;
    }
  }
  int xi = x.id, wi = w.id, bi = b.id;
  return Var{push(std::move(out), {xi, wi, bi},
                  [xi, wi, bi, cin, tlen, cout, k, tout, stride, pad](Tape& t, int self) {
    const Tensor& g = t.g(self);
    const Tensor& vx = t.v(xi);
    const Tensor& vw = t.v(wi);
    bool need_x = t.nodes_[static_cast<size_t>(xi)].requires;
    bool need_w = t.nodes_[static_cast<size_t>(wi)].requires;
    bool need_b = t.nodes_[static_cast<size_t>(bi)].requires;
    Tensor* gx = need_x ? &t.grad_buf(xi) : nullptr;
    Tensor* gw = need_w ? &t.grad_buf(wi) : nullptr;
    Tensor* gb = need_b ? &t.grad_buf(bi) : nullptr;
    for (int co = 0; co < cout; ++co) {
      for (int to = 0; to < tout; ++to) {
        double go = g.at(co, to);
        if (gb) (*gb)[co] += go;
        for (int ci = 0; ci < cin; ++ci) {
          for (int kk = 0; kk < k; ++kk) {
            int ti = to * stride + kk - pad;
            if (ti < 0 || ti >= tlen) continue;
            if (gx) gx->at(ci, ti) += go * vw.at(co, ci, kk);
            if (gw) gw->at(co, ci, kk) += go * vx.at(ci, ti);
          }
        }
      }
    }
  })};
}

Var Tape::conv1d_transpose(Var x, Var w, Var b, int stride, int pad) {
  const Tensor& tx = v(x.id);
  const Tensor& tw = v(w.id);
  const Tensor& tb = v(b.id);
  if (tx.rank() != 2 || tw.rank() != 3 || tb.rank() != 1) {
    throw ShapeError("conv1d_transpose shapes: x" + tx.shape_str() + " w" + tw.shape_str() +
                     " b" + tb.shape_str());
  }
  int cin = tx.dim(0), tlen = tx.dim(1);
  int cout = tw.dim(1), k = tw.dim(2);
  if (tw.dim(0) != cin || tb.dim(0) != cout) {
    throw ShapeError("conv1d_transpose channel mismatch: x" + tx.shape_str() + " w" +
                     tw.shape_str());
  }
  int tout = (tlen - 1) * stride - 2 * pad + k;
  if (tout <= 0) throw ShapeError("conv1d_transpose output length nonpositive");
  Tensor out({cout, tout});
  for (int co = 0; co < cout; ++co)
    for (int to = 0; to < tout; ++to) out.at(co, to) = tb[co];
  for (int ci = 0; ci < cin; ++ci) {
    for (int ti = 0; ti < tlen; ++ti) {
      double xv = tx.at(ci, ti);
      for (int co = 0; co < cout; ++co) {
        for (int kk = 0; kk < k; ++kk) {
          int to = ti * stride + kk - pad;
          if (to < 0 || to >= tout) continue;
          out.at(co, to) += xv * tw.at(ci, co, kk);
        }
      }
    }
  }
  int xi = x.id, wi = w.id, bi = b.id;
  return Var{push(std::move(out), {xi, wi, bi},
                  [xi, wi, bi, cin, tlen, cout, k, tout, stride, pad](Tape& t, int self) {
    const Tensor& g = t.g(self);
    const Tensor& vx = t.v(xi);
    const Tensor& vw = t.v(wi);
    bool need_x = t.nodes_[static_cast<size_t>(xi)].requires;
    bool need_w = t.nodes_[static_cast<size_t>(wi)].requires;
    bool need_b = t.nodes_[static_cast<size_t>(bi)].requires;
    Tensor* gx = need_x ? &t.grad_buf(xi) : nullptr;
    Tensor* gw = need_w ? &t.grad_buf(wi) : nullptr;
    Tensor* gb = need_b ? &t.grad_buf(bi) : nullptr;
    if (gb) {
      for (int co = 0; co < cout; ++co)
        for (int to = 0; to < tout; ++to) (*gb)[co] += g.at(co, to);
    }
    for (int ci = 0; ci < cin; ++ci) {
      for (int ti = 0; ti < tlen; ++ti) {
        for (int co = 0; co < cout; ++co) {
          for (int kk = 0; kk < k; ++kk) {
            int to = ti * stride + kk - pad;
            if (to < 0 || to >= tout) continue;
            double go = g.at(co, to);
            if (gx) gx->at(ci, ti) += go * vw.at(ci, co, kk);
            if (gw) gw->at(ci, co, kk) += go * vx.at(ci, ti);
          }
        }
      }
    }
  })};
}

Var Tape::sum(Var a) {
  const Tensor& ta = v(a.id);
  double acc = 0.0;
  for (double x : ta.data) acc += x;
  int ai = a.id;
  return Var{push(Tensor::scalar(acc), {ai}, [ai](Tape& t, int self) {
    if (!t.nodes_[static_cast<size_t>(ai)].requires) return;
    double go = t.g(self)[0];
    Tensor& ga = t.grad_buf(ai);
    for (double& x : ga.data) x += go;
  })};
}

Var Tape::mean(Var a) {
  const Tensor& ta = v(a.id);
  double acc = 0.0;
  for (double x : ta.data) acc += x;
  int n = ta.size();
  acc /= n;
  int ai = a.id;
  return Var{push(Tensor::scalar(acc), {ai}, [ai, n](Tape& t, int self) {
    if (!t.nodes_[static_cast<size_t>(ai)].requires) return;
    double go = t.g(self)[0] / n;
    Tensor& ga = t.grad_buf(ai);
    for (double& x : ga.data) x += go;
  })};
}

void Tape::backward(Var loss) {
  Node& ln = nodes_[static_cast<size_t>(loss.id)];
  if (ln.value.size() != 1) {
    throw NonScalarLoss("loss has shape " + ln.value.shape_str());
  }
  // interior gradients are per-pass scratch; leaf gradients accumulate
  for (Node& n : nodes_) {
    if (!n.is_leaf && n.grad_live) {
      n.grad = Tensor();
      n.grad_live = false;
    }
  }
  grad_buf(loss.id)[0] += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (!n.requires || !n.grad_live || n.is_leaf || !n.back) continue;
    n.back(*this, id);
  }
}

std::pair<Var, Var> lstm_cell(Tape& tape, Var x, Var h_prev, Var c_prev,
                              const LstmWeights& w) {
  int hidden = tape.val(h_prev).size();
  if (tape.val(w.w_x).rank() != 2 || tape.val(w.w_x).dim(0) != 4 * hidden ||
      tape.val(w.w_h).rank() != 2 || tape.val(w.w_h).dim(0) != 4 * hidden ||
      tape.val(w.w_h).dim(1) != hidden || tape.val(w.b).size() != 4 * hidden) {
    throw ShapeError("lstm_cell weight shapes inconsistent with hidden size " +
                     std::to_string(hidden));
  }
  Var z = tape.add(tape.add(tape.matmul(w.w_x, x), tape.matmul(w.w_h, h_prev)), w.b);
  Var i = tape.sigmoid_(tape.slice(z, 0, hidden));
  Var f = tape.sigmoid_(tape.slice(z, hidden, hidden));
  Var g = tape.tanh_(tape.slice(z, 2 * hidden, hidden));
  Var o = tape.sigmoid_(tape.slice(z, 3 * hidden, hidden));
  Var c = tape.add(tape.mul(f, c_prev), tape.mul(i, g));
  Var h = tape.mul(o, tape.tanh_(c));
  return {h, c};
}

}  // namespace ad
}  // namespace rsmt
