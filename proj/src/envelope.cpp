#include "fmtt/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "fmtt/error.hpp"

namespace fmtt {

namespace {

double level_target(int level) noexcept {
  const double x = level / 99.0;
  return x * x;
}

int segment_index(EgSegment s) noexcept {
  switch (s) {
    case EgSegment::Attack: return 0;
    case EgSegment::Decay1: return 1;
    case EgSegment::Decay2:
    case EgSegment::Sustain: return 2;
    case EgSegment::Release:
    case EgSegment::Done: return 3;
  }
  return 3;
}

}  // namespace

EgConfig EgConfig::from_operator(const OperatorParams& op, double frame_rate) {
  EgConfig c;
  c.rates = op.eg_rates;
  c.levels = op.eg_levels;
  c.output_level = op.output_level;
  c.velocity_sensitivity = op.velocity_sensitivity;
  c.frame_rate = frame_rate;
  return c;
}

double eg_time_constant(int rate) noexcept {
  return kEgTauMax * std::exp2(-std::clamp(rate, 0, 99) / kEgRateOctave);
}

double velocity_gain(int velocity, int sensitivity) noexcept {
  return 1.0 - (sensitivity / 7.0) * (1.0 - velocity / 127.0);
}

EgState eg_note_on(const EgConfig& config, EgState state, int velocity) {
  if (velocity < 1 || velocity > 127) {
    throw Error(ErrorKind::VelocityOutOfRange,
                "velocity " + std::to_string(velocity) + " not in [1, 127]");
  }
  state.segment = EgSegment::Attack;
  state.key_down = true;
  state.velocity_gain = velocity_gain(velocity, config.velocity_sensitivity);
  return state;
}

EgState eg_note_off(EgState state) noexcept {
  state.key_down = false;
  if (state.segment != EgSegment::Done) state.segment = EgSegment::Release;
  return state;
}

EgOutput eg_step(const EgConfig& config, const EgState& state) noexcept {
  EgOutput out{state, 0.0};
  EgState& s = out.state;
  if (s.segment == EgSegment::Done) {
    s.u = 0.0;
    return out;
  }

  const int idx = segment_index(s.segment);
  const double target = level_target(config.levels[idx]);
  const double decay = std::exp(-1.0 / (config.frame_rate * eg_time_constant(config.rates[idx])));
  s.u = std::clamp(target + (s.u - target) * decay, 0.0, 1.0);

  const bool settled = std::abs(s.u - target) < kEgSegmentEpsilon;
  switch (s.segment) {
    case EgSegment::Attack:
      if (settled || s.u >= kEgAttackCompletion * target) s.segment = EgSegment::Decay1;
      break;
    case EgSegment::Decay1:
      if (settled) s.segment = EgSegment::Decay2;
      break;
    case EgSegment::Decay2:
      // The plateau is held exactly rather than approached forever.
      if (settled) {
        s.segment = EgSegment::Sustain;
        s.u = target;
      }
      break;
    case EgSegment::Sustain:
      s.u = target;
      break;
    case EgSegment::Release:
      // A nonzero release level holds indefinitely.
      if (settled && config.levels[3] == 0) s.segment = EgSegment::Done;
      break;
    case EgSegment::Done:
      break;
  }
  if (s.segment == EgSegment::Done) {
    s.u = 0.0;
    return out;
  }

  const double ol = config.output_level / 99.0;
  out.level = 2.0 * s.u * ol * ol * s.velocity_gain;
  return out;
}

std::vector<OperatorLevels> eg_render(const std::array<EgConfig, kNumOperators>& configs,
                                      int velocity, std::size_t note_on, std::size_t note_off,
                                      std::size_t total_frames) {
  if (!(note_on < note_off && note_off <= total_frames)) {
    throw Error(ErrorKind::BadFrameOrdering,
                "need note_on < note_off <= total_frames, got " + std::to_string(note_on) + ", " +
                    std::to_string(note_off) + ", " + std::to_string(total_frames));
  }
  std::vector<OperatorLevels> levels(total_frames, OperatorLevels{});
  std::array<EgState, kNumOperators> states{};
  for (std::size_t k = note_on; k < total_frames; ++k) {
    for (std::size_t op = 0; op < kNumOperators; ++op) {
      if (k == note_on) states[op] = eg_note_on(configs[op], states[op], velocity);
      if (k == note_off) states[op] = eg_note_off(states[op]);
      const EgOutput step = eg_step(configs[op], states[op]);
      states[op] = step.state;
      levels[k][op] = step.level;
    }
  }
  return levels;
}

std::array<EgConfig, kNumOperators> eg_configs(const Dx7Patch& patch, double frame_rate) {
  std::array<EgConfig, kNumOperators> configs;
  for (std::size_t i = 0; i < kNumOperators; ++i) {
    configs[i] = EgConfig::from_operator(patch.operators[i], frame_rate);
  }
  return configs;
}

}  // namespace fmtt
