#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rsmt/tensor.hpp"

namespace rsmt {

// Binary tensor container used for model checkpoints and clip caches.
// Layout: magic "RSMT", version u32 LE, tensor count u32 LE, then per tensor:
// name length u16 LE + UTF-8 name, rank u8, dims as u32 LE, data as f32 LE.
struct NamedTensor {
  std::string name;
  Tensor tensor;
};

void write_container(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_container(const std::string& path);

// Lookup helper; throws CheckpointError when the name is absent.
const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);
bool has_tensor(const std::vector<NamedTensor>& tensors, const std::string& name);

// UTF-8 strings ride in the container as rank-1 tensors of byte values.
Tensor text_tensor(const std::string& text);
std::string tensor_text(const Tensor& t);

}  // namespace rsmt
