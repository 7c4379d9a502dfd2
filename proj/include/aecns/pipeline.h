// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_PIPELINE_H_
#define AECNS_PIPELINE_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aecns/delay_align.h"
#include "aecns/mctcn/model.h"
#include "aecns/mdf_filter.h"
#include "aecns/stft.h"
#include "aecns/waveform.h"

namespace aecns {

struct SessionConfig {
  std::optional<std::string> weights_path;
  mctcn::ModelConfig model;
  DelayAlignConfig delay;
  MdfConfig mdf;
  StftConfig stft;
  bool no_delay = false;
  bool no_filter = false;
  bool no_network = false;

  int hop() const { return stft.hop; }
  // Throws UsageError if every stage is bypassed or the stage hops differ.
  void Validate() const;
};

// JSON session document; every key optional:
//   {"weights": "model.bin",
//    "no_delay": false, "no_filter": false, "no_network": false,
//    "model": {"d_model": 256, "d_f": 64, "kernel": 3, "num_blocks": 20,
//              "max_dilation": 16},
//    "mdf": {"num_blocks": 18, "base_step": 0.5},
//    "delay": {"peaks_per_frame": 6, "threshold_samples": 4000,
//              "max_lag_samples": 16000, "guard_samples": 256}}
// Throws UsageError on unknown keys or bad values.
SessionConfig ParseSessionConfig(const std::string& json_text);
SessionConfig ReadSessionConfig(const std::string& path);

// Loads and validates the weights named by cfg. Returns null when the
// network is bypassed. Throws UsageError if the network is enabled without
// a weight path.
std::shared_ptr<const mctcn::MctcnModel> LoadModel(const SessionConfig& cfg);

// One stream through delay alignment, the adaptive filter and the network,
// one hop at a time. Output lags input by latency_samples().
class Session {
 public:
  // `model` may be null only if cfg.no_network.
  Session(const SessionConfig& cfg, std::shared_ptr<const mctcn::MctcnModel> model);

  struct HopOutput {
    std::vector<double> output;
    std::vector<double> error;  // adaptive filter output for this hop
    std::vector<double> echo;   // echo estimate for this hop
    DelayEstimate estimate;
    int applied_lag = 0;
  };
  HopOutput ProcessHop(std::span<const double> near_hop, std::span<const double> far_hop);

  int hop() const { return cfg_.hop(); }
  int latency_samples() const { return cfg_.no_network ? 0 : cfg_.hop(); }
  const MdfFilter& filter() const { return filter_; }
  int filter_resets() const { return filter_resets_; }

 private:
  SessionConfig cfg_;
  std::shared_ptr<const mctcn::MctcnModel> model_;
  DelayAligner aligner_;
  MdfFilter filter_;
  StreamingStft error_stft_;
  StreamingStft echo_stft_;
  StreamingOverlapAdd synthesis_;
  mctcn::ModelState model_state_;
  int last_shift_ = 0;
  int filter_resets_ = 0;
};

struct EnhanceResult {
  Waveform output;  // same length as the (truncated) near input
  Waveform error;   // adaptive filter output
  Waveform echo;    // echo estimate
  std::vector<DelayEstimate> estimates;  // one per hop
  std::vector<int> applied_lags;
  std::vector<std::string> warnings;
};

// Runs a whole recording through a fresh Session, padding the tail with
// zeros and removing the network latency so output[n] lines up with
// near[n]. Inputs of different length are truncated to the shorter one with
// a warning.
EnhanceResult Enhance(const Waveform& near, const Waveform& far, const SessionConfig& cfg,
                      std::shared_ptr<const mctcn::MctcnModel> model);

}  // namespace aecns

#endif  // AECNS_PIPELINE_H_
