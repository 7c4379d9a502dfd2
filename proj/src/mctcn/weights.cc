// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/mctcn/weights.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include <zlib.h>

#include "aecns/random.h"

namespace aecns::mctcn {
namespace {

constexpr char kMagic[4] = {'M', 'C', 'T', 'N'};

using Kind = WeightFileError::Kind;

std::string ShapeString(const std::vector<uint32_t>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

uint32_t Crc32(const uint8_t* data, size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  while (size > 0) {
    const uInt chunk = static_cast<uInt>(std::min<size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void Bytes(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<uint8_t>& bytes() { return out_; }

 private:
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  Reader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
  void Need(size_t n, const std::string& what) const {
    if (pos_ + n > size_) {
      throw WeightFileError(Kind::kMalformed, "", "unexpected end of data reading " + what);
    }
  }
  uint8_t U8(const std::string& what) {
    Need(1, what);
    return data_[pos_++];
  }
  uint16_t U16(const std::string& what) {
    Need(2, what);
    const uint16_t v = uint16_t(data_[pos_] | data_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }
  uint32_t U32(const std::string& what) {
    Need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  const uint8_t* Take(size_t n, const std::string& what) {
    Need(n, what);
    const uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  bool done() const { return pos_ == size_; }

 private:
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

}  // namespace

WeightFileError::WeightFileError(Kind kind, std::string tensor,
                                 const std::string& message)
    : DataError(tensor.empty() ? "weights: " + message
                               : "weights: tensor '" + tensor + "': " + message),
      kind_(kind),
      tensor_(std::move(tensor)) {}

int64_t Tensor::size() const {
  int64_t n = 1;
  for (uint32_t d : shape) n *= d;
  return n;
}

void ModelWeights::Add(std::string name, Tensor tensor) {
  if (Find(name) != nullptr) {
    throw WeightFileError(Kind::kMalformed, name, "duplicate tensor name");
  }
  tensors_.push_back({std::move(name), std::move(tensor)});
}

const Tensor* ModelWeights::Find(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return &t.tensor;
  }
  return nullptr;
}

const Tensor& ModelWeights::Get(const std::string& name) const {
  const Tensor* t = Find(name);
  if (t == nullptr) throw WeightFileError(Kind::kMissingTensor, name, "missing");
  return *t;
}

std::vector<uint8_t> SerializeWeights(const ModelWeights& weights) {
  Writer w;
  w.Bytes(kMagic, 4);
  w.U32(kWeightFormatVersion);
  w.U32(static_cast<uint32_t>(weights.size()));
  for (const auto& [name, tensor] : weights.tensors()) {
    if (name.size() > 0xFFFF) {
      throw WeightFileError(Kind::kMalformed, name, "name longer than 65535 bytes");
    }
    if (tensor.shape.size() > 0xFF) {
      throw WeightFileError(Kind::kMalformed, name, "rank above 255");
    }
    if (static_cast<int64_t>(tensor.data.size()) != tensor.size()) {
      throw WeightFileError(Kind::kMalformed, name, "data size does not match shape");
    }
    w.U16(static_cast<uint16_t>(name.size()));
    w.Bytes(name.data(), name.size());
    w.U8(static_cast<uint8_t>(tensor.shape.size()));
    for (uint32_t d : tensor.shape) w.U32(d);
    for (float f : tensor.data) {
      uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      w.U32(raw);
    }
  }
  w.U32(Crc32(w.bytes().data(), w.bytes().size()));
  return std::move(w.bytes());
}

ModelWeights ParseWeights(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw WeightFileError(Kind::kBadMagic, "", "bad magic, expected \"MCTN\"");
  }
  if (bytes.size() < 16) {
    throw WeightFileError(Kind::kChecksum, "", "file too short to carry a checksum");
  }
  const size_t body = bytes.size() - 4;
  Reader trailer(bytes.data() + body, 4);
  if (trailer.U32("crc") != Crc32(bytes.data(), body)) {
    throw WeightFileError(Kind::kChecksum, "", "CRC-32 mismatch");
  }
  Reader r(bytes.data() + 4, body - 4);
  const uint32_t version = r.U32("version");
  if (version != kWeightFormatVersion) {
    throw WeightFileError(Kind::kVersionMismatch, "",
                          "version " + std::to_string(version) + ", expected " +
                              std::to_string(kWeightFormatVersion));
  }
  const uint32_t count = r.U32("tensor count");
  ModelWeights weights;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t len = r.U16("name length");
    const uint8_t* name_bytes = r.Take(len, "name");
    std::string name(reinterpret_cast<const char*>(name_bytes), len);
    Tensor t;
    const uint8_t rank = r.U8(name + " rank");
    t.shape.resize(rank);
    for (auto& d : t.shape) d = r.U32(name + " dims");
    const int64_t n = t.size();
    const uint8_t* raw = r.Take(static_cast<size_t>(n) * 4, name + " data");
    t.data.resize(static_cast<size_t>(n));
    for (int64_t j = 0; j < n; ++j) {
      uint32_t bits = uint32_t(raw[4 * j]) | uint32_t(raw[4 * j + 1]) << 8 |
                      uint32_t(raw[4 * j + 2]) << 16 | uint32_t(raw[4 * j + 3]) << 24;
      std::memcpy(&t.data[j], &bits, sizeof bits);
    }
    weights.Add(std::move(name), std::move(t));
  }
  if (!r.done()) throw WeightFileError(Kind::kMalformed, "", "trailing bytes after tensors");
  return weights;
}

void WriteWeightFile(const std::string& path, const ModelWeights& weights) {
  const auto bytes = SerializeWeights(weights);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw WeightFileError(Kind::kIo, "", "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw WeightFileError(Kind::kIo, "", "write failed for " + path);
}

ModelWeights ReadWeightFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightFileError(Kind::kIo, "", "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return ParseWeights(bytes);
}

void ValidateWeights(const ModelWeights& weights, const ModelConfig& cfg) {
  std::set<std::string> expected_names;
  for (const auto& spec : ExpectedTensors(cfg)) {
    expected_names.insert(spec.name);
    const Tensor* t = weights.Find(spec.name);
    if (t == nullptr) throw WeightFileError(Kind::kMissingTensor, spec.name, "missing");
    if (t->shape != spec.shape) {
      throw WeightFileError(Kind::kShapeMismatch, spec.name,
                            "shape " + ShapeString(t->shape) + ", expected " +
                                ShapeString(spec.shape));
    }
    for (float v : t->data) {
      if (!std::isfinite(v)) {
        throw WeightFileError(Kind::kNonFinite, spec.name, "non-finite coefficient");
      }
    }
  }
  for (const auto& t : weights.tensors()) {
    if (!expected_names.contains(t.name)) {
      throw WeightFileError(Kind::kUnexpectedTensor, t.name, "not part of this model");
    }
  }
}

ModelWeights LoadWeights(const std::string& path, const ModelConfig& cfg) {
  ModelWeights w = ReadWeightFile(path);
  ValidateWeights(w, cfg);
  return w;
}

ModelWeights RandomWeights(const ModelConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  ModelWeights weights;
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  for (const auto& spec : ExpectedTensors(cfg)) {
    Tensor t;
    t.shape = spec.shape;
    t.data.assign(static_cast<size_t>(spec.size()), 0.0f);
    const std::string& n = spec.name;
    if (n.find(".ln.gain") != std::string::npos) {
      std::fill(t.data.begin(), t.data.end(), 1.0f);
    } else if (ends_with(n, ".prelu")) {
      std::fill(t.data.begin(), t.data.end(), 0.25f);
    } else if (n.find(".weight") != std::string::npos) {
      int64_t fan_in = 1;
      for (size_t d = 1; d < spec.shape.size(); ++d) fan_in *= spec.shape[d];
      // Complex weights split the variance between the two parts.
      const bool complex = ends_with(n, ".re") || ends_with(n, ".im");
      const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in) * (complex ? 2.0 : 1.0));
      for (auto& v : t.data) v = static_cast<float>(scale * rng.Gaussian());
    }
    weights.Add(n, std::move(t));
  }
  return weights;
}

}  // namespace aecns::mctcn
