#pragma once

#include <string>
#include <vector>

#include "rsmt/rng.hpp"
#include "rsmt/tape.hpp"
#include "rsmt/tensor.hpp"

namespace rsmt {
namespace ad {

// Named parameter container with per-parameter optimizer state and a group id
// used for weight-decay selection and fine-tune freezing.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor m, v, vmax;  // AMSGrad state, allocated on first step
    int group = 0;
  };

  int add(const std::string& name, Tensor init, int group = 0);
  Entry& entry(int id) { return entries_[static_cast<size_t>(id)]; }
  const Entry& entry(int id) const { return entries_[static_cast<size_t>(id)]; }
  int count() const { return static_cast<int>(entries_.size()); }
  int find(const std::string& name) const;  // -1 if absent

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Per-tape binder: creates one leaf per touched parameter and remembers the
// mapping so gradients can be read back after backward(). The trainable mask
// (by group id) decides which leaves require grad; frozen parameters still
// participate in the forward pass and pass gradients through.
class Bind {
 public:
  Bind(Tape& tape, ParamStore& store);
  // groups listed in `trainable_groups` get gradients; everything else frozen
  Bind(Tape& tape, ParamStore& store, const std::vector<int>& trainable_groups);

  Var operator()(int param_id);

  // Gradients aligned with store entries; zero tensors for untouched/frozen.
  std::vector<Tensor> grads() const;
  bool trainable(int param_id) const;

 private:
  Tape& tape_;
  ParamStore& store_;
  std::vector<Var> cache_;
  std::vector<char> trainable_;
};

struct AmsgradConfig {
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

// One AMSGrad update for a single parameter tensor. `step` is 1-based.
void amsgrad_step(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v,
                  Tensor& vmax, const AmsgradConfig& cfg, long step);

// Optimizer over a ParamStore. Weight decay applies only to parameters whose
// group id appears in `decay_groups`; the update mask (when given) restricts
// which parameters move at all.
class Amsgrad {
 public:
  Amsgrad(AmsgradConfig cfg, std::vector<int> decay_groups = {})
      : cfg_(cfg), decay_groups_(std::move(decay_groups)) {}

  void step(ParamStore& store, const std::vector<Tensor>& grads,
            const std::vector<char>* update_mask = nullptr);
  long steps_taken() const { return step_; }

 private:
  AmsgradConfig cfg_;
  std::vector<int> decay_groups_;
  long step_ = 0;
};

// ---- layer descriptors (hold parameter ids) ----

struct Linear {
  int w = -1;
  int b = -1;
};
Linear make_linear(ParamStore& store, const std::string& name, int in, int out,
                   Rng& rng, int group = 0);
Var linear(Tape& tape, Bind& bind, const Linear& l, Var x);

enum class Act { kNone, kElu, kTanh };

struct Mlp {
  std::vector<Linear> layers;
  Act act = Act::kElu;
};
Mlp make_mlp(ParamStore& store, const std::string& name,
             const std::vector<int>& widths, Rng& rng, int group = 0,
             Act act = Act::kElu);
Var mlp(Tape& tape, Bind& bind, const Mlp& m, Var x);

struct Conv1dLayer {
  int w = -1;
  int b = -1;
  int stride = 1;
  int pad = 0;
  bool transposed = false;
};
Conv1dLayer make_conv1d(ParamStore& store, const std::string& name, int cin,
                        int cout, int kernel, int stride, int pad, Rng& rng,
                        int group = 0, bool transposed = false);
Var conv1d(Tape& tape, Bind& bind, const Conv1dLayer& c, Var x);

// Feature-wise linear modulation: scale/shift of x from a conditioning vector.
// Zero-initialized head makes this the identity at initialization.
struct FilmBlock {
  Linear to_scale_shift;
};
FilmBlock make_film(ParamStore& store, const std::string& name, int cond_dim,
                    int feat_dim, Rng& rng, int group = 0);
Var film(Tape& tape, Bind& bind, const FilmBlock& f, Var x, Var cond);

// Single-head dot-product attention pooling rows of `keys` (T, C_k) against a
// query vector derived from x.
struct AttentionBlock {
  Linear q;     // (d, C_x)
  int wk = -1;  // (C_k, d)
  int wv = -1;  // (C_k, d_v)
  int dim = 0;
};
AttentionBlock make_attention(ParamStore& store, const std::string& name,
                              int query_in, int key_in, int dim, int value_dim,
                              Rng& rng, int group = 0);
Var attention(Tape& tape, Bind& bind, const AttentionBlock& a, Var x, Var keys);

struct LstmLayer {
  int w_x = -1;
  int w_h = -1;
  int b = -1;
  int hidden = 0;
};
LstmLayer make_lstm(ParamStore& store, const std::string& name, int input,
                    int hidden, Rng& rng, int group = 0);
std::pair<Var, Var> lstm(Tape& tape, Bind& bind, const LstmLayer& l, Var x,
                         Var h_prev, Var c_prev);

}  // namespace ad
}  // namespace rsmt
