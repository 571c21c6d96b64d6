#include "rsmt/nn.hpp"

#include <algorithm>
#include <cmath>

#include "rsmt/errors.hpp"

namespace rsmt {
namespace ad {

int ParamStore::add(const std::string& name, Tensor init, int group) {
  if (find(name) >= 0) throw ConfigError("duplicate parameter name " + name);
  Entry e;
  e.name = name;
  e.value = std::move(init);
  e.group = group;
  entries_.push_back(std::move(e));
  return static_cast<int>(entries_.size()) - 1;
}

int ParamStore::find(const std::string& name) const {
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Bind::Bind(Tape& tape, ParamStore& store) : tape_(tape), store_(store) {
  cache_.assign(static_cast<size_t>(store.count()), Var{});
  trainable_.assign(static_cast<size_t>(store.count()), 1);
}

Bind::Bind(Tape& tape, ParamStore& store, const std::vector<int>& trainable_groups)
    : tape_(tape), store_(store) {
  cache_.assign(static_cast<size_t>(store.count()), Var{});
  trainable_.assign(static_cast<size_t>(store.count()), 0);
  for (int i = 0; i < store.count(); ++i) {
    int g = store.entry(i).group;
    if (std::find(trainable_groups.begin(), trainable_groups.end(), g) !=
        trainable_groups.end()) {
      trainable_[static_cast<size_t>(i)] = 1;
    }
  }
}

Var Bind::operator()(int param_id) {
  auto idx = static_cast<size_t>(param_id);
  if (!cache_[idx].valid()) {
    cache_[idx] = tape_.leaf(store_.entry(param_id).value,
                             trainable_[idx] != 0);
  }
  return cache_[idx];
}

bool Bind::trainable(int param_id) const {
  return trainable_[static_cast<size_t>(param_id)] != 0;
}

std::vector<Tensor> Bind::grads() const {
  std::vector<Tensor> out(static_cast<size_t>(store_.count()));
  for (int i = 0; i < store_.count(); ++i) {
    auto idx = static_cast<size_t>(i);
    if (cache_[idx].valid() && trainable_[idx]) {
      out[idx] = tape_.grad(cache_[idx]);
    } else {
      out[idx] = Tensor::zeros(store_.entry(i).value.shape);
    }
  }
  return out;
}

void amsgrad_step(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                  Tensor& vmax, const AmsgradConfig& cfg, long step) {
  if (!param.same_shape(grad)) {
    throw ShapeError("amsgrad: param " + param.shape_str() + " vs grad " + grad.shape_str());
  }
  if (m.size() != param.size()) {
    m = Tensor::zeros(param.shape);
    v = Tensor::zeros(param.shape);
    vmax = Tensor::zeros(param.shape);
  }
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (int i = 0; i < param.size(); ++i) {
    double gi = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
    vmax[i] = std::max(vmax[i], v[i]);
    double denom = std::sqrt(vmax[i] / bc2) + cfg.eps;
    if (cfg.weight_decay != 0.0) param[i] -= cfg.lr * cfg.weight_decay * param[i];
    param[i] -= cfg.lr * (m[i] / bc1) / denom;
  }
}

void Amsgrad::step(ParamStore& store, const std::vector<Tensor>& grads,
                   const std::vector<char>* update_mask) {
  if (static_cast<int>(grads.size()) != store.count()) {
    throw ShapeError("optimizer grads count " + std::to_string(grads.size()) +
                     " vs params " + std::to_string(store.count()));
  }
  ++step_;
  for (int i = 0; i < store.count(); ++i) {
    if (update_mask && !(*update_mask)[static_cast<size_t>(i)]) continue;
    auto& e = store.entry(i);
    AmsgradConfig c = cfg_;
    c.weight_decay = 0.0;
    if (std::find(decay_groups_.begin(), decay_groups_.end(), e.group) !=
        decay_groups_.end()) {
      c.weight_decay = cfg_.weight_decay;
    }
    amsgrad_step(e.value, grads[static_cast<size_t>(i)], e.m, e.v, e.vmax, c, step_);
  }
}

namespace {

Tensor uniform_init(const std::vector<int>& shape, int fan_in, Rng& rng) {
  Tensor t(shape);
  double a = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
  for (double& x : t.data) x = rng.uniform(-a, a);
  return t;
}

}  // namespace

Linear make_linear(ParamStore& store, const std::string& name, int in, int out,
                   Rng& rng, int group) {
  Linear l;
  l.w = store.add(name + ".w", uniform_init({out, in}, in, rng), group);
  l.b = store.add(name + ".b", uniform_init({out}, in, rng), group);
  return l;
}

Var linear(Tape& tape, Bind& bind, const Linear& l, Var x) {
  return tape.add(tape.matmul(bind(l.w), x), bind(l.b));
}

Mlp make_mlp(ParamStore& store, const std::string& name,
             const std::vector<int>& widths, Rng& rng, int group, Act act) {
  Mlp m;
  m.act = act;
  for (size_t i = 0; i + 1 < widths.size(); ++i) {
    m.layers.push_back(make_linear(store, name + ".l" + std::to_string(i),
                                   widths[i], widths[i + 1], rng, group));
  }
  return m;
}

Var mlp(Tape& tape, Bind& bind, const Mlp& m, Var x) {
  Var h = x;
  for (size_t i = 0; i < m.layers.size(); ++i) {
    h = linear(tape, bind, m.layers[i], h);
    bool last = (i + 1 == m.layers.size());
    if (!last) {
      if (m.act == Act::kElu) h = tape.elu_(h);
      if (m.act == Act::kTanh) h = tape.tanh_(h);
    }
  }
  return h;
}

Conv1dLayer make_conv1d(ParamStore& store, const std::string& name, int cin,
                        int cout, int kernel, int stride, int pad, Rng& rng,
                        int group, bool transposed) {
  Conv1dLayer c;
  c.stride = stride;
  c.pad = pad;
  c.transposed = transposed;
  int fan_in = cin * kernel;
  std::vector<int> wshape =
      transposed ? std::vector<int>{cin, cout, kernel} : std::vector<int>{cout, cin, kernel};
  c.w = store.add(name + ".w", uniform_init(wshape, fan_in, rng), group);
  c.b = store.add(name + ".b", uniform_init({cout}, fan_in, rng), group);
  return c;
}

Var conv1d(Tape& tape, Bind& bind, const Conv1dLayer& c, Var x) {
  if (c.transposed) return tape.conv1d_transpose(x, bind(c.w), bind(c.b), c.stride, c.pad);
  return tape.conv1d(x, bind(c.w), bind(c.b), c.stride, c.pad);
}

FilmBlock make_film(ParamStore& store, const std::string& name, int cond_dim,
                    int feat_dim, Rng& rng, int group) {
  FilmBlock f;
  f.to_scale_shift = make_linear(store, name + ".ss", cond_dim, 2 * feat_dim, rng, group);
  // identity at init: zero scale offset, zero shift
  auto& w = store.entry(f.to_scale_shift.w).value;
  auto& b = store.entry(f.to_scale_shift.b).value;
  for (double& x : w.data) x = 0.0;
  for (double& x : b.data) x = 0.0;
  return f;
}

Var film(Tape& tape, Bind& bind, const FilmBlock& f, Var x, Var cond) {
  int d = tape.val(x).size();
  Var ss = linear(tape, bind, f.to_scale_shift, cond);
  Var gamma = tape.slice(ss, 0, d);
  Var beta = tape.slice(ss, d, d);
  return tape.add(tape.mul(x, tape.add_const(gamma, 1.0)), beta);
}

AttentionBlock make_attention(ParamStore& store, const std::string& name,
                              int query_in, int key_in, int dim, int value_dim,
                              Rng& rng, int group) {
  AttentionBlock a;
  a.dim = dim;
  a.q = make_linear(store, name + ".q", query_in, dim, rng, group);
  a.wk = store.add(name + ".wk", uniform_init({key_in, dim}, key_in, rng), group);
  a.wv = store.add(name + ".wv", uniform_init({key_in, value_dim}, key_in, rng), group);
  return a;
}

Var attention(Tape& tape, Bind& bind, const AttentionBlock& a, Var x, Var keys) {
  Var q = linear(tape, bind, a.q, x);                 // (d)
  Var k = tape.matmul(keys, bind(a.wk));              // (T, d)
  Var vvals = tape.matmul(keys, bind(a.wv));          // (T, dv)
  Var scores = tape.matmul(k, q);                     // (T)
  scores = tape.scale(scores, 1.0 / std::sqrt(static_cast<double>(a.dim)));
  Var alpha = tape.softmax(scores);
  return tape.matmul(alpha, vvals);                   // (dv)
}

LstmLayer make_lstm(ParamStore& store, const std::string& name, int input,
                    int hidden, Rng& rng, int group) {
  LstmLayer l;
  l.hidden = hidden;
  l.w_x = store.add(name + ".wx", uniform_init({4 * hidden, input}, input, rng), group);
  l.w_h = store.add(name + ".wh", uniform_init({4 * hidden, hidden}, hidden, rng), group);
  l.b = store.add(name + ".b", uniform_init({4 * hidden}, hidden, rng), group);
  return l;
}

std::pair<Var, Var> lstm(Tape& tape, Bind& bind, const LstmLayer& l, Var x,
                         Var h_prev, Var c_prev) {
  LstmWeights w{bind(l.w_x), bind(l.w_h), bind(l.b)};
  return lstm_cell(tape, x, h_prev, c_prev, w);
}

}  // namespace ad
}  // namespace rsmt
