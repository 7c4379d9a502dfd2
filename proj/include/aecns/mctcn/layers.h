// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_MCTCN_LAYERS_H_
#define AECNS_MCTCN_LAYERS_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "aecns/mctcn/weights.h"

namespace aecns::mctcn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kLayerNormEpsilon = 1e-5;

Vector LoadVector(const ModelWeights& w, const std::string& name);
Matrix LoadMatrix(const ModelWeights& w, const std::string& name);

struct Linear {
  Matrix weight;  // [out, in]
  Vector bias;

  static Linear Load(const ModelWeights& w, const std::string& prefix);
  Vector Forward(const Vector& x) const;
};

// Normalizes over the feature axis of a single frame.
struct LayerNorm {
  Vector gain;
  Vector bias;

  static LayerNorm Load(const ModelWeights& w, const std::string& gain_name,
                        const std::string& bias_name);
  Vector Forward(const Vector& x) const;
};

struct PRelu {
  Vector slope;  // one per channel

  static PRelu Load(const ModelWeights& w, const std::string& name);
  Vector Forward(const Vector& x) const;
};

// Affine -> layer norm -> PReLU.
struct FcCustom {
  Linear fc;
  LayerNorm ln;
  PRelu act;

  static FcCustom Load(const ModelWeights& w, const std::string& prefix);
  Vector Forward(const Vector& x) const;
};

struct ComplexVector {
  Vector re;
  Vector im;
};

// (Wr + jWi)(xr + jxi) + (br + jbi).
struct ComplexLinear {
  Linear re;
  Linear im;

  static ComplexLinear Load(const ModelWeights& w, const std::string& prefix);
  ComplexVector Forward(const ComplexVector& x) const;
};

// Independent real layer norms on the real and imaginary parts.
struct ComplexLayerNorm {
  LayerNorm re;
  LayerNorm im;

  static ComplexLayerNorm Load(const ModelWeights& w, const std::string& prefix);
  ComplexVector Forward(const ComplexVector& x) const;
};

// Complex affine -> complex layer norm -> real PReLU on each part.
struct ComplexFcCustom {
  ComplexLinear fc;
  ComplexLayerNorm ln;
  PRelu act;

  static ComplexFcCustom Load(const ModelWeights& w, const std::string& prefix);
  ComplexVector Forward(const ComplexVector& x) const;
};

// Causal history for one dilated convolution: the last (kernel - 1) *
// dilation normalized inputs. Zero-length for kernel-1 units.
class FrameHistory {
 public:
  FrameHistory() = default;
  FrameHistory(int width, int length, bool complex);

  int length() const { return length_; }
  int width() const { return width_; }
  // Input `lag` frames back, 1 <= lag <= length.
  auto Real(int lag) const { return re_.col(Slot(lag)); }
  auto Imag(int lag) const { return im_.col(Slot(lag)); }
  void Push(const Vector& re);
  void Push(const Vector& re, const Vector& im);

 private:
  int Slot(int lag) const { return ((head_ - lag) % length_ + length_) % length_; }

  int width_ = 0;
  int length_ = 0;
  int head_ = 0;
  Eigen::MatrixXd re_;
  Eigen::MatrixXd im_;
};

// PReLU -> layer norm -> causal dilated convolution.
struct ConvUnit {
  PRelu act;
  LayerNorm ln;
  std::vector<Matrix> taps;  // taps[i] multiplies the input (k-1-i)*dilation back
  Vector bias;
  int dilation = 1;

  static ConvUnit Load(const ModelWeights& w, const std::string& prefix, int dilation);
  int kernel() const { return static_cast<int>(taps.size()); }
  int history_length() const { return (kernel() - 1) * dilation; }
  int in_width() const { return static_cast<int>(bias.size() == 0 ? 0 : taps[0].cols()); }
  Vector Forward(const Vector& x, FrameHistory& history) const;
};

struct ComplexConvUnit {
  PRelu act;
  ComplexLayerNorm ln;
  std::vector<Matrix> taps_re;
  std::vector<Matrix> taps_im;
  Vector bias_re;
  Vector bias_im;
  int dilation = 1;

  static ComplexConvUnit Load(const ModelWeights& w, const std::string& prefix,
                              int dilation);
  int kernel() const { return static_cast<int>(taps_re.size()); }
  int history_length() const { return (kernel() - 1) * dilation; }
  int in_width() const { return static_cast<int>(taps_re[0].cols()); }
  ComplexVector Forward(const ComplexVector& x, FrameHistory& history) const;
};

}  // namespace aecns::mctcn

#endif  // AECNS_MCTCN_LAYERS_H_
