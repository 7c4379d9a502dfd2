// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_MCTCN_CONFIG_H_
#define AECNS_MCTCN_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

namespace aecns::mctcn {

// Shape of the cascaded magnitude/complex TCN. The defaults are the
// published configuration.
struct ModelConfig {
  int d_model = 256;
  int d_f = 64;
  int kernel = 3;
  int num_blocks = 20;
  int max_dilation = 16;
  int bins = 257;

  // Width of the residual trunk: both input branches concatenated.
  int trunk() const { return 2 * d_model; }
  // Throws UsageError on an invalid combination.
  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Dilation of block b (1-based): 2^((b - 1) mod (log2(max_dilation) + 1)),
// cycling 1, 2, 4, ..., max_dilation. Throws UsageError unless
// max_dilation is a power of two and b >= 1.
int DilationRate(int block_index, int max_dilation);

// Frames of look-back per core: sum over blocks of (kernel - 1) * dilation.
int ReceptiveField(const ModelConfig& cfg);

struct TensorSpec {
  std::string name;
  std::vector<uint32_t> shape;
  int64_t size() const;
};

// Every tensor the engine needs for `cfg`, in canonical file order.
//
// Real layers:    <layer>.weight [out, in], <layer>.bias [out]
// Convolutions:   <unit>.conv.weight [out, in, kernel]; tap i multiplies the
//                 input (kernel - 1 - i) * dilation frames back
// Layer norm:     <layer>.ln.gain, <layer>.ln.bias
// PReLU:          <layer>.prelu (one slope per channel)
// Complex layers store each real tensor as "<name>.re" and "<name>.im";
// the PReLU of a complex layer is real and shared by both parts.
std::vector<TensorSpec> ExpectedTensors(const ModelConfig& cfg);

// Number of trainable coefficients, the sum of ExpectedTensors sizes.
int64_t ParamCount(const ModelConfig& cfg);

// Canonical layer prefixes.
std::string MagnitudeBlockPrefix(int block, int unit);
std::string ComplexBlockPrefix(int block, int unit);

}  // namespace aecns::mctcn

#endif  // AECNS_MCTCN_CONFIG_H_
