#pragma once

// Frame-rate DX7-style envelope generator.
//
// Each segment relaxes an internal level u toward the target (L/99)^2:
//   u <- T + (u - T) * exp(-dt / tau(R)),   tau(R) = kEgTauMax * 2^(-R / kEgRateOctave)
// and the emitted linear level is 2 * u * (output_level/99)^2 * velocity_gain,
// which lives in [0, 2].

#include <array>
#include <cstddef>
#include <vector>

#include "fmtt/constants.hpp"
#include "fmtt/patch.hpp"

namespace fmtt {

inline constexpr double kEgTauMax = 8.0;        // seconds, rate 0
inline constexpr double kEgRateOctave = 8.0;    // rate steps per halving of tau
inline constexpr double kEgSegmentEpsilon = 1e-3;
inline constexpr double kEgAttackCompletion = 0.995;
/// Level (on the [0,2] scale) below which an envelope counts as silent.
inline constexpr double kEnvelopeSilence = 1e-3;

struct EgConfig {
  std::array<int, 4> rates{99, 99, 99, 99};
  std::array<int, 4> levels{99, 99, 99, 0};
  int output_level = 99;
  int velocity_sensitivity = 0;
  double frame_rate = kFrameRate;

  static EgConfig from_operator(const OperatorParams& op, double frame_rate = kFrameRate);
};

enum class EgSegment { Attack, Decay1, Decay2, Sustain, Release, Done };

struct EgState {
  EgSegment segment = EgSegment::Done;
  double u = 0.0;
  bool key_down = false;
  double velocity_gain = 1.0;

  bool operator==(const EgState&) const = default;
};

struct EgOutput {
  EgState state;
  double level = 0.0;
};

/// Time constant in seconds for a 0..99 rate.
double eg_time_constant(int rate) noexcept;

/// Linear velocity gain 1 - (sensitivity/7) * (1 - velocity/127).
double velocity_gain(int velocity, int sensitivity) noexcept;

/// Retriggers from the current level. Throws VelocityOutOfRange outside [1,127].
EgState eg_note_on(const EgConfig& config, EgState state, int velocity);
EgState eg_note_off(EgState state) noexcept;
EgOutput eg_step(const EgConfig& config, const EgState& state) noexcept;

using OperatorLevels = std::array<double, kNumOperators>;

/// Runs six envelopes for one note. Row k holds the levels after frame k.
/// Requires note_on < note_off <= total_frames.
std::vector<OperatorLevels> eg_render(const std::array<EgConfig, kNumOperators>& configs,
                                      int velocity, std::size_t note_on, std::size_t note_off,
                                      std::size_t total_frames);

std::array<EgConfig, kNumOperators> eg_configs(const Dx7Patch& patch,
                                               double frame_rate = kFrameRate);

}  // namespace fmtt
