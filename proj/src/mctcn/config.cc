// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/mctcn/config.h"

#include <bit>

#include "aecns/error.h"

namespace aecns::mctcn {
namespace {

bool IsPowerOfTwo(int v) { return v > 0 && std::has_single_bit(static_cast<unsigned>(v)); }

struct UnitShape {
  int in;
  int out;
  int kernel;
};

// unit1 squeezes the trunk to d_f, unit2 is the dilated kernel-k
// convolution, unit3 expands back to the trunk width.
UnitShape BlockUnit(const ModelConfig& cfg, int unit) {
  switch (unit) {
    case 1:
      return {cfg.trunk(), cfg.d_f, 1};
    case 2:
      return {cfg.d_f, cfg.d_f, cfg.kernel};
    default:
      return {cfg.d_f, cfg.trunk(), 1};
  }
}

uint32_t U(int v) { return static_cast<uint32_t>(v); }

void AddReal(std::vector<TensorSpec>& out, const std::string& name,
             std::vector<uint32_t> shape) {
  out.push_back({name, std::move(shape)});
}

void AddComplex(std::vector<TensorSpec>& out, const std::string& name,
                const std::vector<uint32_t>& shape) {
  out.push_back({name + ".re", shape});
  out.push_back({name + ".im", shape});
}

}  // namespace

void ModelConfig::Validate() const {
  if (d_model < 1 || d_f < 1 || bins < 2) {
    throw UsageError("model: d_model, d_f must be >= 1 and bins >= 2");
  }
  if (kernel < 1) throw UsageError("model: kernel must be >= 1");
  if (num_blocks < 0) throw UsageError("model: num_blocks must be >= 0");
  if (!IsPowerOfTwo(max_dilation)) {
    throw UsageError("model: max_dilation must be a power of two");
  }
}

int DilationRate(int block_index, int max_dilation) {
  if (block_index < 1) throw UsageError("dilation: block index must be >= 1");
  if (!IsPowerOfTwo(max_dilation)) {
    throw UsageError("dilation: max_dilation must be a power of two, got " +
                     std::to_string(max_dilation));
  }
  const int cycle = std::countr_zero(static_cast<unsigned>(max_dilation)) + 1;
  return 1 << ((block_index - 1) % cycle);
}

int ReceptiveField(const ModelConfig& cfg) {
  int frames = 0;
  for (int b = 1; b <= cfg.num_blocks; ++b) {
    frames += (cfg.kernel - 1) * DilationRate(b, cfg.max_dilation);
  }
  return frames;
}

int64_t TensorSpec::size() const {
  int64_t n = 1;
  for (uint32_t d : shape) n *= d;
  return n;
}

std::string MagnitudeBlockPrefix(int block, int unit) {
  return "mag.block" + std::to_string(block) + ".unit" + std::to_string(unit);
}

std::string ComplexBlockPrefix(int block, int unit) {
  return "cplx.block" + std::to_string(block) + ".unit" + std::to_string(unit);
}

std::vector<TensorSpec> ExpectedTensors(const ModelConfig& cfg) {
  cfg.Validate();
  std::vector<TensorSpec> out;
  const uint32_t dm = U(cfg.d_model);
  const uint32_t bins = U(cfg.bins);

  for (const char* branch : {"in_e", "in_y"}) {
    const std::string p = std::string("mag.") + branch;
    AddReal(out, p + ".fc.weight", {dm, bins});
    AddReal(out, p + ".fc.bias", {dm});
    AddReal(out, p + ".ln.gain", {dm});
    AddReal(out, p + ".ln.bias", {dm});
    AddReal(out, p + ".prelu", {dm});
  }
  for (int b = 1; b <= cfg.num_blocks; ++b) {
    for (int u = 1; u <= 3; ++u) {
      const auto s = BlockUnit(cfg, u);
      const std::string p = MagnitudeBlockPrefix(b, u);
      AddReal(out, p + ".prelu", {U(s.in)});
      AddReal(out, p + ".ln.gain", {U(s.in)});
      AddReal(out, p + ".ln.bias", {U(s.in)});
      AddReal(out, p + ".conv.weight", {U(s.out), U(s.in), U(s.kernel)});
      AddReal(out, p + ".conv.bias", {U(s.out)});
    }
  }
  AddReal(out, "mag.out.weight", {bins, U(cfg.trunk())});
  AddReal(out, "mag.out.bias", {bins});

  for (const char* branch : {"in_e", "in_y"}) {
    const std::string p = std::string("cplx.") + branch;
    AddComplex(out, p + ".fc.weight", {dm, bins});
    AddComplex(out, p + ".fc.bias", {dm});
    AddComplex(out, p + ".ln.gain", {dm});
    AddComplex(out, p + ".ln.bias", {dm});
    AddReal(out, p + ".prelu", {dm});
  }
  for (int b = 1; b <= cfg.num_blocks; ++b) {
    for (int u = 1; u <= 3; ++u) {
      const auto s = BlockUnit(cfg, u);
      const std::string p = ComplexBlockPrefix(b, u);
      AddReal(out, p + ".prelu", {U(s.in)});
      AddComplex(out, p + ".ln.gain", {U(s.in)});
      AddComplex(out, p + ".ln.bias", {U(s.in)});
      AddComplex(out, p + ".conv.weight", {U(s.out), U(s.in), U(s.kernel)});
      AddComplex(out, p + ".conv.bias", {U(s.out)});
    }
  }
  // Each mask head reads the real and imaginary trunk side by side.
  for (const char* head : {"cplx.out_re", "cplx.out_im"}) {
    AddReal(out, std::string(head) + ".weight", {bins, U(2 * cfg.trunk())});
    AddReal(out, std::string(head) + ".bias", {bins});
  }
  return out;
}

int64_t ParamCount(const ModelConfig& cfg) {
  int64_t total = 0;
  for (const auto& t : ExpectedTensors(cfg)) total += t.size();
  return total;
}

}  // namespace aecns::mctcn
