#pragma once

// Six-operator phase-modulation bank driven by frame-rate controls.
//
// Operator indices are 0-based throughout (index 0 is OP1). Per sample:
//   x_i = L_i * sin(theta_i + sum_{j in mod(i)} x_j [+ fb])
//   fb  = (feedback/7) * (prev + prev2) / 2   of the feedback source operator
//   out = sum_{c in carriers} x_c / |carriers|
// where L_i = 2 * ol_i is interpolated linearly across the window, as is f0.

#include <array>
#include <span>
#include <vector>

#include "fmtt/constants.hpp"
#include "fmtt/dataset.hpp"
#include "fmtt/patch.hpp"

namespace fmtt {

struct AlgorithmSpec {
  std::array<std::vector<int>, kNumOperators> modulators;
  std::vector<int> carriers;
  int feedback_op = -1;      // operator receiving self/loop feedback
  int feedback_source = -1;  // operator whose output is fed back
};

/// DX7 routing for algorithm 1..32.
const AlgorithmSpec& algorithm_table(int algorithm);

struct VoiceConfig {
  AlgorithmSpec algorithm;
  std::array<OperatorParams, kNumOperators> operators{};
  int feedback_level = 0;  // 0..7
  int sample_rate = kSampleRate;

  static VoiceConfig from_patch(const Dx7Patch& patch);
};

using OpLevels = std::array<double, kNumOperators>;

struct SynthState {
  std::array<double, kNumOperators> phase{};
  double fb_prev = 0.0;
  double fb_prev2 = 0.0;
  OpLevels last_ol{};
  double last_f0 = 0.0;

  /// Zero phases and feedback memory; interpolation endpoints are kept.
  void reset_oscillators() noexcept;
  /// Set the interpolation start point, e.g. to avoid a ramp from silence.
  void prime(const OpLevels& ol, double f0) noexcept;
};

/// Renders out.size() samples moving controls from the state's last values to
/// (ol, f0). ol is normalised to [0,1].
void render_window(const VoiceConfig& config, SynthState& state, const OpLevels& ol, double f0,
                   std::span<float> out);

/// Renders ol_seq.size() frames of `hop` samples from a fresh state.
std::vector<float> render_sequence(const VoiceConfig& config, std::span<const OlFrame> ol_seq,
                                   std::span<const double> f0_seq, int hop = kHop);

}  // namespace fmtt
