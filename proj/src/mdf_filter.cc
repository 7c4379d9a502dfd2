// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/mdf_filter.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "aecns/error.h"

namespace aecns {
namespace {

// Leak estimator constants, per 16 ms block.
constexpr double kSpectrumAverage = 256.0 / 16000.0;
constexpr double kLeakRateEcho = 2.0 * 256.0 / 16000.0;
constexpr double kLeakRateMax = 0.5 * 256.0 / 16000.0;
constexpr double kMinLeak = 0.005;
// Bootstrap rate until the leak estimate is trustworthy.
constexpr double kBootstrapShare = 1.0;
constexpr double kAdaptedLeak = 0.03;
// Residual-echo share of the error is leak * echo / error. The smoothed
// leak trails new far-end spectral content by seconds, so it is scaled up;
// double talk is left to the two-path checks.
constexpr double kLeakShareGain = 64.0;
// Energies below these are numerical noise, not evidence.
constexpr double kSilentWindowEnergy = 1e-9;
constexpr double kSilentBlockEnergy = 1e-12;
// Smoothing of the long-term near-end block energy (about 2 s).
constexpr double kNearLevelRate = 1.0 / 125.0;

bool AllFinite(const std::vector<Spectrum>& blocks) {
  for (const auto& b : blocks) {
    for (const auto& c : b) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    }
  }
  return true;
}

double BlockEnergy(const Spectrum& s) {
  double acc = 0.0;
  for (const auto& c : s) acc += std::norm(c);
  return acc;
}

void ZeroBlocks(std::vector<Spectrum>& blocks) {
  for (auto& b : blocks) std::fill(b.begin(), b.end(), Complex());
}

}  // namespace

void MdfConfig::Validate() const {
  if (block_samples < 2 || block_samples % 2 != 0) {
    throw UsageError("mdf: block_samples must be even and >= 2");
  }
  if (num_blocks < 1) throw UsageError("mdf: num_blocks must be >= 1");
  if (!(base_step > 0.0 && base_step <= 1.0)) {
    throw UsageError("mdf: base_step must lie in (0, 1]");
  }
  if (!(regularization > 0.0)) throw UsageError("mdf: regularization must be > 0");
  if (!(power_smoothing >= 0.0 && power_smoothing < 1.0)) {
    throw UsageError("mdf: power_smoothing must lie in [0, 1)");
  }
  if (!(pnlms_floor >= 0.0 && pnlms_floor <= 1.0)) {
    throw UsageError("mdf: pnlms_floor must lie in [0, 1]");
  }
  if (!(promotion_margin >= 0.0 && promotion_margin < 1.0)) {
    throw UsageError("mdf: promotion_margin must lie in [0, 1)");
  }
  if (!(promotion_significance >= 0.0) || !(backtrack_significance >= 0.0)) {
    throw UsageError("mdf: significance factors must be >= 0");
  }
  if (promotion_window < 1 || divergence_blocks < 1) {
    throw UsageError("mdf: windows must be >= 1 block");
  }
  if (!(divergence_factor > 0.0)) throw UsageError("mdf: divergence_factor must be > 0");
  if (!(foreground_amplify_limit >= 1.0)) {
    throw UsageError("mdf: foreground_amplify_limit must be >= 1");
  }
  if (!(amplify_level_share >= 0.0)) throw UsageError("mdf: amplify_level_share must be >= 0");
}

double PathStats::ForegroundSum() const {
  return std::accumulate(foreground.begin(), foreground.end(), 0.0);
}

double PathStats::DifferenceSum() const {
  return std::accumulate(difference.begin(), difference.end(), 0.0);
}

double PathStats::BackgroundSum() const {
  return std::accumulate(background.begin(), background.end(), 0.0);
}

MdfState MdfState::Create(const MdfConfig& cfg) {
  cfg.Validate();
  const size_t bins = static_cast<size_t>(cfg.num_bins());
  const size_t blocks = static_cast<size_t>(cfg.num_blocks);
  MdfState s;
  s.background.assign(blocks, Spectrum(bins));
  s.foreground.assign(blocks, Spectrum(bins));
  s.far_history.assign(blocks, Spectrum(bins));
  s.previous_far.assign(static_cast<size_t>(cfg.block_samples), 0.0);
  s.power.assign(bins, 0.0);
  s.paths.foreground.assign(static_cast<size_t>(cfg.promotion_window), 0.0);
  s.paths.background.assign(static_cast<size_t>(cfg.promotion_window), 0.0);
  s.paths.difference.assign(static_cast<size_t>(cfg.promotion_window), 0.0);
  s.paths.near.assign(static_cast<size_t>(cfg.promotion_window), 0.0);
  s.lr.error_psd_avg.assign(bins, 0.0);
  s.lr.echo_psd_avg.assign(bins, 0.0);
  return s;
}

bool MdfState::AllFinite() const {
  return aecns::AllFinite(background) && aecns::AllFinite(foreground) &&
         std::all_of(power.begin(), power.end(),
                     [](double p) { return std::isfinite(p); });
}

Spectrum ConstrainBlock(const Spectrum& weights, RealFft& fft) {
  std::vector<double> taps(static_cast<size_t>(fft.size()));
  fft.Inverse(weights, taps);
  std::fill(taps.begin() + fft.size() / 2, taps.end(), 0.0);
  Spectrum out(weights.size());
  fft.Forward(taps, out);
  return out;
}

Spectrum ConstrainBlock(const Spectrum& weights) {
  if (weights.size() < 2) throw DataError("ConstrainBlock: need at least 2 bins");
  RealFft fft(static_cast<int>(weights.size() - 1) * 2);
  return ConstrainBlock(weights, fft);
}

std::vector<double> ProportionateGains(const MdfState& state, double floor) {
  const size_t k = state.background.size();
  std::vector<double> energy(k);
  for (size_t b = 0; b < k; ++b) energy[b] = BlockEnergy(state.background[b]);
  for (auto& e : energy) e = std::sqrt(e);
  const double total = std::accumulate(energy.begin(), energy.end(), 0.0);
  std::vector<double> gains(k, 1.0 / static_cast<double>(k));
  if (!(total > 0.0) || !std::isfinite(total)) return gains;
  for (size_t b = 0; b < k; ++b) {
    gains[b] = floor / static_cast<double>(k) + (1.0 - floor) * energy[b] / total;
  }
  return gains;
}

std::vector<std::vector<double>> PnlmsStepSizes(const MdfState& state,
                                                const MdfConfig& cfg) {
  const auto gains = ProportionateGains(state, cfg.pnlms_floor);
  const size_t bins = state.power.size();
  const double mean_power =
      std::accumulate(state.power.begin(), state.power.end(), 0.0) / static_cast<double>(bins);
  const double reg = cfg.regularization * mean_power + cfg.regularization_floor;
  // Gain-weighted power of the far spectra the blocks multiply. At an onset
  // the smoothed PSD lags far behind it and would overshoot the update.
  std::vector<double> weighted(bins, 0.0);
  for (size_t b = 0; b < gains.size(); ++b) {
    for (size_t i = 0; i < bins; ++i) weighted[i] += gains[b] * std::norm(state.far_history[b][i]);
  }
  std::vector<std::vector<double>> steps(gains.size(), std::vector<double>(bins));
  for (size_t i = 0; i < bins; ++i) {
    // The error block fills half the transform window, hence the factor 2
    // that makes learning_rate = 1 a full NLMS step.
    const double norm = 2.0 * state.learning_rate / (std::max(state.power[i], weighted[i]) + reg);
    for (size_t b = 0; b < gains.size(); ++b) steps[b][i] = norm * gains[b];
  }
  return steps;
}

double LearningRateControl(const MdfState& state, const MdfConfig& cfg,
                           double near_energy, double error_energy) {
  if (!(near_energy > 0.0)) return 0.0;
  if (!(error_energy > 0.0)) return cfg.base_step;
  const auto& lr = state.lr;
  double share;
  if (lr.adapted) {
    share = kLeakShareGain * lr.leak * lr.echo_energy / error_energy;
    // An under-converged filter leaves error correlated with its own echo
    // estimate; near-end speech does not.
    if (lr.echo_energy > 0.0) {
      share = std::max(share, lr.error_echo_cross * lr.error_echo_cross /
                                  (error_energy * lr.echo_energy));
    }
  } else {
    share = kBootstrapShare * std::min(1.0, lr.far_energy / error_energy);
  }
  return cfg.base_step * std::clamp(share, 0.0, 1.0);
}

bool TwoPathControl(MdfState& state, const MdfConfig& cfg) {
  auto& p = state.paths;
  if (p.filled < cfg.promotion_window) return false;
  const double fg = p.ForegroundSum();
  const double bg = p.BackgroundSum();
  if (std::max(fg, bg) < kSilentWindowEnergy) return false;
  const double gain2 = (fg - bg) * (fg - bg);
  const double spread = fg * p.DifferenceSum();
  if (bg > fg && gain2 > cfg.backtrack_significance * spread) {
    // The background is clearly worse; restart it from the foreground.
    state.background = state.foreground;
    p.background = p.foreground;
    std::fill(p.difference.begin(), p.difference.end(), 0.0);
    ++state.backtracks;
    return false;
  }
  if (!(bg < (1.0 - cfg.promotion_margin) * fg)) return false;
  if (!(gain2 > cfg.promotion_significance * spread)) return false;
  state.foreground = state.background;
  p.foreground = p.background;
  std::fill(p.difference.begin(), p.difference.end(), 0.0);
  ++state.promotions;
  return true;
}

std::array<int, 2> ConstraintSchedule(const MdfState& state) {
  const int k = static_cast<int>(state.background.size());
  int strongest = 0;
  double best = -1.0;
  for (int b = 0; b < k; ++b) {
    const double e = BlockEnergy(state.background[b]);
    if (e > best) {
      best = e;
      strongest = b;
    }
  }
  int rotating = state.rotating_index % k;
  if (rotating == strongest) rotating = (rotating + 1) % k;
  return {strongest, rotating};
}

MdfFilter::MdfFilter(const MdfConfig& cfg)
    : cfg_(cfg), state_(MdfState::Create(cfg)), fft_(cfg.fft_size()) {}

void MdfFilter::Reset() {
  state_ = MdfState::Create(cfg_);
  frozen_ = false;
}

void MdfFilter::SetEchoPath(std::span<const double> taps) {
  if (static_cast<int>(taps.size()) > cfg_.tail_samples()) {
    throw DataError("SetEchoPath: " + std::to_string(taps.size()) +
                    " taps exceed the filter tail");
  }
  RequireFinite(taps, "echo path");
  const size_t block = static_cast<size_t>(cfg_.block_samples);
  std::vector<double> seg(static_cast<size_t>(cfg_.fft_size()));
  for (size_t k = 0; k < static_cast<size_t>(cfg_.num_blocks); ++k) {
    std::fill(seg.begin(), seg.end(), 0.0);
    for (size_t j = 0; j < block && k * block + j < taps.size(); ++j) {
      seg[j] = taps[k * block + j];
    }
    fft_.Forward(seg, state_.background[k]);
  }
  state_.foreground = state_.background;
  frozen_ = true;
}

void MdfFilter::UpdateLeak(const Spectrum& error_spec, const Spectrum& echo_spec) {
  auto& lr = state_.lr;
  double cross = 0.0;
  double var = 0.0;
  for (size_t i = 0; i < error_spec.size(); ++i) {
    const double ef = std::norm(error_spec[i]);
    const double yf = std::norm(echo_spec[i]);
    const double eh = ef - lr.error_psd_avg[i];
    const double yh = yf - lr.echo_psd_avg[i];
    cross += eh * yh;
    var += yh * yh;
    lr.error_psd_avg[i] += kSpectrumAverage * (ef - lr.error_psd_avg[i]);
    lr.echo_psd_avg[i] += kSpectrumAverage * (yf - lr.echo_psd_avg[i]);
  }
  if (!(var > 0.0)) return;
  // Normalize so every block carries equal weight in the recursion.
  const double norm = std::sqrt(var);
  cross /= norm;
  var = norm;

  double error_energy = 0.0;
  for (const auto& c : error_spec) error_energy += std::norm(c);
  if (!(error_energy > 0.0)) return;
  double echo_energy = 0.0;
  for (const auto& c : echo_spec) echo_energy += std::norm(c);
  const double alpha =
      std::min(kLeakRateEcho * echo_energy, kLeakRateMax * error_energy) / error_energy;
  lr.cross = (1.0 - alpha) * lr.cross + alpha * cross;
  lr.echo_var = (1.0 - alpha) * lr.echo_var + alpha * var;
  if (lr.echo_var > 0.0) {
    lr.leak = std::clamp(lr.cross / lr.echo_var, kMinLeak, 1.0);
  }
}

FilterOutput MdfFilter::ProcessBlock(std::span<const double> far_block,
                                     std::span<const double> near_block) {
  const size_t block = static_cast<size_t>(cfg_.block_samples);
  const size_t fft = static_cast<size_t>(cfg_.fft_size());
  const size_t bins = static_cast<size_t>(cfg_.num_bins());
  const size_t k_blocks = static_cast<size_t>(cfg_.num_blocks);
  if (far_block.size() != block || near_block.size() != block) {
    throw DataError("mdf: expected blocks of " + std::to_string(block) + " samples");
  }
  RequireFinite(far_block, "mdf far block");
  RequireFinite(near_block, "mdf near block");
  auto& s = state_;

  // Far-end spectrum of [previous block, current block].
  std::vector<double> buf(fft);
  std::copy(s.previous_far.begin(), s.previous_far.end(), buf.begin());
  std::copy(far_block.begin(), far_block.end(), buf.begin() + block);
  std::rotate(s.far_history.rbegin(), s.far_history.rbegin() + 1, s.far_history.rend());
  fft_.Forward(buf, s.far_history[0]);
  s.previous_far.assign(far_block.begin(), far_block.end());
  const Spectrum& x_now = s.far_history[0];
  const bool first = s.blocks_processed == 0;
  for (size_t i = 0; i < bins; ++i) {
    const double p = std::norm(x_now[i]);
    s.power[i] = first ? p : cfg_.power_smoothing * s.power[i] +
                                 (1.0 - cfg_.power_smoothing) * p;
  }

  // Echo estimates for both paths; keep the last half of each inverse.
  auto estimate = [&](const std::vector<Spectrum>& w, std::vector<double>& y) {
    Spectrum acc(bins);
    for (size_t k = 0; k < k_blocks; ++k) {
      const Spectrum& wk = w[k];
      const Spectrum& xk = s.far_history[k];
      for (size_t i = 0; i < bins; ++i) acc[i] += wk[i] * xk[i];
    }
    std::vector<double> time(fft);
    fft_.Inverse(acc, time);
    y.assign(time.begin() + block, time.end());
  };
  FilterOutput out;
  estimate(s.foreground, out.echo);
  out.error.resize(block);
  for (size_t n = 0; n < block; ++n) out.error[n] = near_block[n] - out.echo[n];
  ++s.blocks_processed;
  if (frozen_) return out;

  const double near_energy = Energy(near_block);

  std::vector<double> echo_bg;
  estimate(s.background, echo_bg);
  std::vector<double> error_bg(block);
  for (size_t n = 0; n < block; ++n) error_bg[n] = near_block[n] - echo_bg[n];

  const double error_fg_energy = Energy(out.error);
  const double error_bg_energy = Energy(error_bg);

  // Learning-rate statistics from the adapting (background) path.
  auto padded_spectrum = [&](std::span<const double> half) {
    std::fill(buf.begin(), buf.begin() + block, 0.0);
    std::copy(half.begin(), half.end(), buf.begin() + block);
    Spectrum spec(bins);
    fft_.Forward(buf, spec);
    return spec;
  };
  const Spectrum error_spec = padded_spectrum(error_bg);
  UpdateLeak(error_spec, padded_spectrum(echo_bg));
  s.lr.echo_energy = Energy(echo_bg);
  s.lr.error_echo_cross = 0.0;
  for (size_t n = 0; n < block; ++n) s.lr.error_echo_cross += error_bg[n] * echo_bg[n];
  s.lr.far_energy = Energy(far_block);
  s.learning_rate = LearningRateControl(s, cfg_, near_energy, error_bg_energy);
  if (!s.lr.adapted) {
    s.lr.bootstrap_sum += s.learning_rate / cfg_.base_step;
    if (s.lr.bootstrap_sum >= static_cast<double>(k_blocks) &&
        s.lr.leak > kAdaptedLeak) {
      s.lr.adapted = true;
    }
  }

  auto& paths = s.paths;
  paths.foreground[paths.head] = error_fg_energy;
  paths.background[paths.head] = error_bg_energy;
  paths.near[paths.head] = near_energy;
  paths.near_level += kNearLevelRate * (near_energy - paths.near_level);
  const double allowed =
      cfg_.foreground_amplify_limit * (near_energy + cfg_.amplify_level_share * paths.near_level);
  if (error_fg_energy > allowed + kSilentBlockEnergy) {
    // The foreground amplifies the microphone: fall back to passthrough.
    // Its window history becomes that of a zero filter.
    ZeroBlocks(s.foreground);
    std::fill(out.echo.begin(), out.echo.end(), 0.0);
    out.error.assign(near_block.begin(), near_block.end());
    paths.foreground = paths.near;
    ++s.foreground_drops;
  }
  double difference = 0.0;
  for (size_t n = 0; n < block; ++n) {
    difference += (out.error[n] - error_bg[n]) * (out.error[n] - error_bg[n]);
  }
  paths.difference[paths.head] = difference;
  paths.head = (paths.head + 1) % cfg_.promotion_window;
  paths.filled = std::min(paths.filled + 1, cfg_.promotion_window);

  // Background gradient step.
  if (s.learning_rate > 0.0) {
    const auto steps = PnlmsStepSizes(s, cfg_);
    for (size_t k = 0; k < k_blocks; ++k) {
      Spectrum& wk = s.background[k];
      const Spectrum& xk = s.far_history[k];
      for (size_t i = 0; i < bins; ++i) {
        wk[i] += steps[k][i] * std::conj(xk[i]) * error_spec[i];
      }
    }
  }
  const auto schedule = ConstraintSchedule(s);
  s.background[schedule[0]] = ConstrainBlock(s.background[schedule[0]], fft_);
  if (schedule[1] != schedule[0]) {
    s.background[schedule[1]] = ConstrainBlock(s.background[schedule[1]], fft_);
  }
  s.last_constrained = schedule;
  s.rotating_index = (s.rotating_index + 1) % cfg_.num_blocks;

  // Divergence guard.
  if (error_bg_energy > cfg_.divergence_factor * near_energy) {
    ++paths.divergence_run;
  } else {
    paths.divergence_run = 0;
  }
  bool restarted = false;
  if (paths.divergence_run >= cfg_.divergence_blocks || !aecns::AllFinite(s.background)) {
    ZeroBlocks(s.background);
    paths.divergence_run = 0;
    ++s.resets;
    restarted = true;
  }

  const int backtracks = s.backtracks;
  TwoPathControl(s, cfg_);
  if (s.backtracks != backtracks) {
    restarted = restarted || std::all_of(s.background.begin(), s.background.end(),
                                         [](const Spectrum& b) { return BlockEnergy(b) == 0.0; });
  }
  // A background starting from zero has no echo estimate to steer the
  // learning rate; go back to the bootstrap rate.
  if (restarted) {
    s.lr.adapted = false;
    s.lr.bootstrap_sum = 0.0;
  }
  return out;
}

}  // namespace aecns
