#include "rsmt/container.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "rsmt/errors.hpp"

namespace rsmt {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'M', 'T'};
constexpr uint32_t kVersion = 1;

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path)
      : bytes_(bytes), path_(path) {}

  uint8_t u8() { return static_cast<uint8_t>(take(1)[0]); }

  uint16_t u16() {
    const char* p = take(2);
    return static_cast<uint16_t>(static_cast<uint8_t>(p[0]) |
                                 (static_cast<uint8_t>(p[1]) << 8));
  }

  uint32_t u32() {
    const char* p = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(p[i])) << (8 * i);
    return v;
  }

  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::string str(size_t n) { return std::string(take(n), n); }

 private:
  const char* take(size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw CheckpointError("truncated container " + path_);
    }
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  const std::string& bytes_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

void write_container(const std::string& path, const std::vector<NamedTensor>& tensors) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(tensors.size()));
  for (const auto& nt : tensors) {
    if (nt.name.size() > 0xffff) throw CheckpointError("tensor name too long: " + nt.name);
    put_u16(out, static_cast<uint16_t>(nt.name.size()));
    out.append(nt.name);
    out.push_back(static_cast<char>(nt.tensor.rank()));
    for (int d : nt.tensor.shape) put_u32(out, static_cast<uint32_t>(d));
    for (double v : nt.tensor.data) put_f32(out, static_cast<float>(v));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw CheckpointError("write failed: " + path);
}

std::vector<NamedTensor> read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(bytes, path);
  if (r.str(4) != std::string(kMagic, 4)) throw CheckpointError("bad magic in " + path);
  uint32_t version = r.u32();
  if (version != kVersion) {
    throw CheckpointError("unsupported container version " + std::to_string(version) +
                          " in " + path);
  }
  uint32_t count = r.u32();
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = r.str(r.u16());
    int rank = r.u8();
    std::vector<int> shape(static_cast<size_t>(rank));
    for (int d = 0; d < rank; ++d) shape[static_cast<size_t>(d)] = static_cast<int>(r.u32());
    Tensor t(shape);
    for (double& v : t.data) v = static_cast<double>(r.f32());
    nt.tensor = std::move(t);
    out.push_back(std::move(nt));
  }
  return out;
}

const Tensor& find_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& nt : tensors) {
    if (nt.name == name) return nt.tensor;
  }
  throw CheckpointError("missing tensor: " + name);
}

bool has_tensor(const std::vector<NamedTensor>& tensors, const std::string& name) {
  for (const auto& nt : tensors) {
    if (nt.name == name) return true;
  }
  return false;
}

Tensor text_tensor(const std::string& text) {
  if (text.empty()) return Tensor({1}, {0.0});
  Tensor t({static_cast<int>(text.size())});
  for (size_t i = 0; i < text.size(); ++i) {
    t.data[i] = static_cast<double>(static_cast<uint8_t>(text[i]));
  }
  return t;
}

std::string tensor_text(const Tensor& t) {
  std::string s;
  s.reserve(t.data.size());
  for (double v : t.data) {
    auto c = static_cast<uint8_t>(v);
    if (c != 0) s.push_back(static_cast<char>(c));
  }
  return s;
}

}  // namespace rsmt
