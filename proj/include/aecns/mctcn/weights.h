// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_MCTCN_WEIGHTS_H_
#define AECNS_MCTCN_WEIGHTS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "aecns/error.h"
#include "aecns/mctcn/config.h"

namespace aecns::mctcn {

struct Tensor {
  std::vector<uint32_t> shape;
  std::vector<float> data;  // row-major

  int64_t size() const;
  bool operator==(const Tensor&) const = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
  bool operator==(const NamedTensor&) const = default;
};

// Named tensors in file order. Immutable once loaded; share freely.
class ModelWeights {
 public:
  void Add(std::string name, Tensor tensor);
  const Tensor* Find(const std::string& name) const;
  // Throws WeightFileError(kMissingTensor) if absent.
  const Tensor& Get(const std::string& name) const;

  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  size_t size() const { return tensors_.size(); }
  bool operator==(const ModelWeights& other) const { return tensors_ == other.tensors_; }

 private:
  std::vector<NamedTensor> tensors_;
};

class WeightFileError : public DataError {
 public:
  enum class Kind {
    kIo,
    kBadMagic,
    kVersionMismatch,
    kChecksum,
    kMalformed,
    kMissingTensor,
    kUnexpectedTensor,
    kShapeMismatch,
    kNonFinite,
  };
  WeightFileError(Kind kind, std::string tensor, const std::string& message);

  Kind kind() const { return kind_; }
  // Offending tensor, empty for whole-file errors.
  const std::string& tensor() const { return tensor_; }

 private:
  Kind kind_;
  std::string tensor_;
};

// Binary layout (all integers little-endian):
//   "MCTN" | u32 version | u32 tensor count |
//   per tensor: u16 name length, UTF-8 name, u8 rank, u32 dims[rank],
//               binary32 data (row-major) |
//   u32 CRC-32 of every preceding byte
constexpr uint32_t kWeightFormatVersion = 1;

std::vector<uint8_t> SerializeWeights(const ModelWeights& weights);
// Checks CRC, magic and version before reading any tensor; no shape checks.
ModelWeights ParseWeights(const std::vector<uint8_t>& bytes);

void WriteWeightFile(const std::string& path, const ModelWeights& weights);
ModelWeights ReadWeightFile(const std::string& path);

// Every expected tensor present with the exact shape, nothing extra, all
// coefficients finite.
void ValidateWeights(const ModelWeights& weights, const ModelConfig& cfg);

// ReadWeightFile + ValidateWeights.
ModelWeights LoadWeights(const std::string& path, const ModelConfig& cfg);

// Seeded initialization: Gaussian weights scaled by 1/sqrt(fan_in), zero
// biases, unit LN gains, PReLU slopes 0.25.
ModelWeights RandomWeights(const ModelConfig& cfg, uint64_t seed);

}  // namespace aecns::mctcn

#endif  // AECNS_MCTCN_WEIGHTS_H_
