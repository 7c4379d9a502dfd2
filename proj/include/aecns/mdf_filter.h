// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef AECNS_MDF_FILTER_H_
#define AECNS_MDF_FILTER_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "aecns/stft.h"
#include "aecns/waveform.h"

namespace aecns {

// Multidelay block frequency-domain echo canceller (overlap-save, 50%
// overlap). The echo path is split into num_blocks partitions of
// block_samples taps each.
struct MdfConfig {
  int block_samples = 256;
  int num_blocks = 18;
  double base_step = 0.5;
  // Added to the far-end PSD before division: regularization * mean(psd)
  // plus an absolute floor so a silent reference never divides by zero.
  double regularization = 1e-6;
  double regularization_floor = 1e-10;
  // Per-block smoothing of the far-end PSD.
  double power_smoothing = 0.9;
  // Every block keeps at least pnlms_floor of its uniform share of the step.
  double pnlms_floor = 0.05;
  // Background replaces foreground when its windowed error energy is below
  // (1 - promotion_margin) times the foreground's.
  double promotion_margin = 0.10;
  int promotion_window = 16;
  // Promotion also needs (fg - bg)^2 > promotion_significance * fg * diff
  // over the window, diff being the energy of the output difference.
  double promotion_significance = 0.7;
  // The background restarts from the foreground when it is worse and
  // (bg - fg)^2 > backtrack_significance * fg * diff.
  double backtrack_significance = 4.0;
  // Background is zeroed after divergence_blocks consecutive blocks with
  // error energy above divergence_factor times the near-end energy.
  double divergence_factor = 4.0;
  int divergence_blocks = 32;
  // Foreground is zeroed when its error block carries more than
  // foreground_amplify_limit * (near + amplify_level_share * long-term near)
  // block energy.
  double foreground_amplify_limit = 2.0;
  double amplify_level_share = 0.1;

  int fft_size() const { return 2 * block_samples; }
  int num_bins() const { return block_samples + 1; }
  int tail_samples() const { return block_samples * num_blocks; }
  void Validate() const;
};

// Running statistics behind the double-talk learning-rate control. The
// leak estimate is the regression coefficient of error-power fluctuations
// on echo-estimate-power fluctuations, i.e. the share of the echo estimate
// still left in the output.
struct LeakStats {
  std::vector<double> error_psd_avg;
  std::vector<double> echo_psd_avg;
  double cross = 0.0;     // smoothed sum of error/echo PSD fluctuation products
  double echo_var = 0.0;  // smoothed sum of squared echo PSD fluctuations
  double leak = 0.0;
  double echo_energy = 0.0;  // background echo estimate energy, last block
  double far_energy = 0.0;   // far-end block energy, last block
  double error_echo_cross = 0.0;  // sum of error * echo estimate, last block
  // Until the filter has adapted, a fixed bootstrap rate is used.
  bool adapted = false;
  double bootstrap_sum = 0.0;
};

// Windowed error energies of the two echo paths.
struct PathStats {
  std::vector<double> foreground;  // ring of per-block energies
  std::vector<double> background;
  std::vector<double> difference;  // energy of (foreground - background) error
  std::vector<double> near;
  double near_level = 0.0;  // long-term average near-end block energy
  int head = 0;
  int filled = 0;
  int divergence_run = 0;

  double ForegroundSum() const;
  double BackgroundSum() const;
  double DifferenceSum() const;
};

struct MdfState {
  // [block][bin]; block k multiplies the far spectrum from k blocks ago.
  std::vector<Spectrum> background;
  std::vector<Spectrum> foreground;
  // [k] is the far spectrum of k blocks ago.
  std::vector<Spectrum> far_history;
  std::vector<double> previous_far;  // last far block, first half of the FFT input
  std::vector<double> power;         // smoothed |X|^2 per bin
  PathStats paths;
  LeakStats lr;
  double learning_rate = 0.0;  // last value from LearningRateControl
  int rotating_index = 0;
  // Blocks constrained in the most recent iteration.
  std::array<int, 2> last_constrained = {-1, -1};
  int64_t blocks_processed = 0;
  int promotions = 0;
  int resets = 0;
  int foreground_drops = 0;
  int backtracks = 0;

  static MdfState Create(const MdfConfig& cfg);
  bool AllFinite() const;
};

struct FilterOutput {
  std::vector<double> error;  // e(n) = near - echo
  std::vector<double> echo;   // foreground echo estimate
};

// Gradient constraint: inverse transform, zero taps block..2*block-1,
// forward transform. Idempotent.
Spectrum ConstrainBlock(const Spectrum& weights, RealFft& fft);
Spectrum ConstrainBlock(const Spectrum& weights);

// Per-block share of the step, summing to 1: floor / K plus
// (1 - floor) * n_k / sum(n), where n_k is the norm (root energy) of
// background block k. Uniform when all blocks are empty.
std::vector<double> ProportionateGains(const MdfState& state, double floor);

// Step size for every block and bin:
// 2 * learning_rate * gain_k / (max(psd_i, sum_b gain_b |X_b(i)|^2) + reg).
std::vector<std::vector<double>> PnlmsStepSizes(const MdfState& state,
                                                const MdfConfig& cfg);

// Global step in [0, base_step]. Zero when the near end is silent. Once the
// filter has adapted it is base_step times the estimated residual-echo share
// of the error, max(64 * leak * echo / error, corr(error, echo)^2) capped
// at 1; before that base_step * min(1, far / error).
double LearningRateControl(const MdfState& state, const MdfConfig& cfg,
                           double near_energy, double error_energy);

// Copies background into foreground when the background's windowed error
// energy beats the foreground's by the promotion margin and the gain is
// large against the energy of the difference between the two outputs.
// Returns whether a promotion happened.
bool TwoPathControl(MdfState& state, const MdfConfig& cfg);

// Blocks to constrain this iteration: the highest-energy background block
// and the rotating index (advanced past the first if they coincide).
std::array<int, 2> ConstraintSchedule(const MdfState& state);

class MdfFilter {
 public:
  explicit MdfFilter(const MdfConfig& cfg = {});

  // Filters one block. Non-finite input raises DataError and leaves the
  // state untouched.
  FilterOutput ProcessBlock(std::span<const double> far_block,
                            std::span<const double> near_block);

  // Sets both paths to the given time-domain impulse response (at most
  // tail_samples taps) and stops adaptation.
  void SetEchoPath(std::span<const double> taps);
  void set_frozen(bool frozen) { frozen_ = frozen; }

  void Reset();
  const MdfConfig& config() const { return cfg_; }
  const MdfState& state() const { return state_; }
  MdfState& mutable_state() { return state_; }

 private:
  void UpdateLeak(const Spectrum& error_spec, const Spectrum& echo_spec);

  MdfConfig cfg_;
  MdfState state_;
  RealFft fft_;
  bool frozen_ = false;
};

}  // namespace aecns

#endif  // AECNS_MDF_FILTER_H_
