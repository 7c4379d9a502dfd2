// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/pipeline.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aecns/error.h"

namespace aecns {
namespace {

using nlohmann::json;

template <typename T>
T Get(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw UsageError("session config: bad value for '" + key + "'");
  }
}

void RequireObject(const json& v, const std::string& key) {
  if (!v.is_object()) throw UsageError("session config: '" + key + "' must be an object");
}

}  // namespace

void SessionConfig::Validate() const {
  if (no_delay && no_filter && no_network) {
    throw UsageError("session: every processing stage is bypassed");
  }
  stft.Validate();
  mdf.Validate();
  delay.Validate();
  model.Validate();
  if (mdf.block_samples != stft.hop || delay.hop != stft.hop) {
    throw UsageError("session: delay, filter and STFT hops must match");
  }
  if (model.bins != stft.num_bins()) {
    throw UsageError("session: model bins must equal STFT bins");
  }
}

SessionConfig ParseSessionConfig(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("session config: ") + e.what());
  }
  RequireObject(doc, "(top level)");
  SessionConfig cfg;
  for (const auto& [key, v] : doc.items()) {
    if (key == "weights") {
      cfg.weights_path = Get<std::string>(v, key);
    } else if (key == "no_delay") {
      cfg.no_delay = Get<bool>(v, key);
    } else if (key == "no_filter") {
      cfg.no_filter = Get<bool>(v, key);
    } else if (key == "no_network") {
      cfg.no_network = Get<bool>(v, key);
    } else if (key == "model") {
      RequireObject(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        if (k == "d_model") cfg.model.d_model = Get<int>(x, name);
        else if (k == "d_f") cfg.model.d_f = Get<int>(x, name);
        else if (k == "kernel") cfg.model.kernel = Get<int>(x, name);
        else if (k == "num_blocks") cfg.model.num_blocks = Get<int>(x, name);
        else if (k == "max_dilation") cfg.model.max_dilation = Get<int>(x, name);
        else throw UsageError("session config: unknown key '" + name + "'");
      }
    } else if (key == "mdf") {
      RequireObject(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        if (k == "num_blocks") cfg.mdf.num_blocks = Get<int>(x, name);
        else if (k == "base_step") cfg.mdf.base_step = Get<double>(x, name);
        else throw UsageError("session config: unknown key '" + name + "'");
      }
    } else if (key == "delay") {
      RequireObject(v, key);
      for (const auto& [k, x] : v.items()) {
        const std::string name = key + "." + k;
        if (k == "peaks_per_frame") cfg.delay.peaks_per_frame = Get<int>(x, name);
        else if (k == "threshold_samples") cfg.delay.threshold_samples = Get<int>(x, name);
        else if (k == "max_lag_samples") cfg.delay.max_lag_samples = Get<int>(x, name);
        else if (k == "guard_samples") cfg.delay.guard_samples = Get<int>(x, name);
        else throw UsageError("session config: unknown key '" + name + "'");
      }
    } else {
      throw UsageError("session config: unknown key '" + key + "'");
    }
  }
  cfg.Validate();
  return cfg;
}

SessionConfig ReadSessionConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open session config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseSessionConfig(ss.str());
}

std::shared_ptr<const mctcn::MctcnModel> LoadModel(const SessionConfig& cfg) {
  if (cfg.no_network) return nullptr;
  if (!cfg.weights_path) {
    throw UsageError("network enabled but no weight file given (use --weights or --no-network)");
  }
  const mctcn::ModelWeights weights = mctcn::LoadWeights(*cfg.weights_path, cfg.model);
  return std::make_shared<const mctcn::MctcnModel>(weights, cfg.model);
}

Session::Session(const SessionConfig& cfg, std::shared_ptr<const mctcn::MctcnModel> model)
    : cfg_(cfg),
      model_(std::move(model)),
      aligner_(cfg.delay),
      filter_(cfg.mdf),
      error_stft_(cfg.stft),
      echo_stft_(cfg.stft),
      synthesis_(cfg.stft) {
  cfg_.Validate();
  if (!cfg_.no_network) {
    if (!model_) throw UsageError("session: network enabled without a model");
    if (!(model_->config() == cfg_.model)) {
      throw UsageError("session: model shape differs from the session config");
    }
    model_state_ = model_->NewState();
  }
}

Session::HopOutput Session::ProcessHop(std::span<const double> near_hop,
                                       std::span<const double> far_hop) {
  const size_t hop = static_cast<size_t>(cfg_.hop());
  if (near_hop.size() != hop || far_hop.size() != hop) {
    throw DataError("session: expected " + std::to_string(hop) + " samples per signal");
  }
  RequireFinite(near_hop, "near-end input");
  RequireFinite(far_hop, "far-end input");
  HopOutput out;

  std::vector<double> reference(far_hop.begin(), far_hop.end());
  if (!cfg_.no_delay) {
    DelayAligner::HopResult r = aligner_.Push(near_hop, far_hop);
    out.estimate = r.estimate;
    out.applied_lag = r.applied_lag;
    reference = std::move(r.reference);
    // A jump in the reference shift invalidates the learned echo path.
    if (r.shift != last_shift_) {
      filter_.Reset();
      ++filter_resets_;
      last_shift_ = r.shift;
    }
  }

  if (cfg_.no_filter) {
    out.error.assign(near_hop.begin(), near_hop.end());
    out.echo.assign(hop, 0.0);
  } else {
    FilterOutput f = filter_.ProcessBlock(reference, near_hop);
    out.error = std::move(f.error);
    out.echo = std::move(f.echo);
  }

  if (cfg_.no_network) {
    out.output = out.error;
    return out;
  }
  const SpectralFrame e = error_stft_.Push(out.error);
  const SpectralFrame y = echo_stft_.Push(out.echo);
  const mctcn::ModelOutput m = model_->Process(e.bins, y.bins, model_state_);
  out.output = synthesis_.Push(m.enhanced);
  return out;
}

EnhanceResult Enhance(const Waveform& near, const Waveform& far, const SessionConfig& cfg,
                      std::shared_ptr<const mctcn::MctcnModel> model) {
  EnhanceResult result;
  if (near.sample_rate != kSampleRate || far.sample_rate != kSampleRate) {
    throw DataError("enhance: inputs must be 16 kHz");
  }
  size_t n = near.size();
  if (far.size() != near.size()) {
    n = std::min(near.size(), far.size());
    result.warnings.push_back("near and far lengths differ (" + std::to_string(near.size()) +
                              " vs " + std::to_string(far.size()) + "); truncated to " +
                              std::to_string(n) + " samples");
  }
  Session session(cfg, std::move(model));
  const size_t hop = static_cast<size_t>(session.hop());
  const size_t latency = static_cast<size_t>(session.latency_samples());
  const size_t hops = (n + latency + hop - 1) / hop;

  std::vector<double> output, error, echo;
  output.reserve(hops * hop);
  std::vector<double> nh(hop), fh(hop);
  for (size_t t = 0; t < hops; ++t) {
    for (size_t i = 0; i < hop; ++i) {
      const size_t idx = t * hop + i;
      nh[i] = idx < n ? near.samples[idx] : 0.0;
      fh[i] = idx < n ? far.samples[idx] : 0.0;
    }
    Session::HopOutput h = session.ProcessHop(nh, fh);
    output.insert(output.end(), h.output.begin(), h.output.end());
    error.insert(error.end(), h.error.begin(), h.error.end());
    echo.insert(echo.end(), h.echo.begin(), h.echo.end());
    result.estimates.push_back(h.estimate);
    result.applied_lags.push_back(h.applied_lag);
  }
  result.output = Waveform(std::vector<double>(output.begin() + latency, output.begin() + latency + n));
  error.resize(n);
  echo.resize(n);
  result.error = Waveform(std::move(error));
  result.echo = Waveform(std::move(echo));
  return result;
}

}  // namespace aecns
