#pragma once

// Frame-wise conditioning features from monophonic audio.
//
//   a_k = 1 + max(-70, 10 log10(mean(x^2))) / 70          (0 for silence)
//   f_k = (12 log2(f0 / 220) + 57.01) / 127              (0 when unvoiced)
//
// both clamped to [0, 1]. f0 comes from YIN over a 1024-sample window.

#include <span>
#include <vector>

#include "fmtt/audio.hpp"
#include "fmtt/constants.hpp"

namespace fmtt {

struct AnalysisConfig {
  int sample_rate = kSampleRate;
  int hop = kHop;
  int yin_window = 1024;
  double yin_threshold = 0.15;
  double max_f0 = 1200.0;
  int rms_window = 1024;
  double db_floor = -70.0;
};

struct FeatureFrame {
  double a = 0.0;
  double f = 0.0;
  double f0 = 0.0;  // Hz, 0 when unvoiced
};

double rms_norm(std::span<const float> window, double db_floor = -70.0) noexcept;

/// YIN over `window` (length config.yin_window, integration length half of it).
/// Returns 0 when no lag passes the threshold at a genuine local minimum.
double yin_f0(std::span<const float> window, const AnalysisConfig& config = {});

double f_norm(double f0) noexcept;

/// Inverse of the dataset pitch mapping f = note / 127.
double note_to_hz(double note) noexcept;

/// Offline framing, identical to feeding whole hops to a FeatureStream: frame k
/// covers samples [(k+1)*hop - W, (k+1)*hop), zero before the start. A trailing
/// partial hop is dropped. Requires 44.1 kHz.
std::vector<FeatureFrame> analyze(const AudioBuffer& audio, const AnalysisConfig& config = {});

/// Causal streaming extractor. Each pushed hop yields one frame computed on the
/// most recent W samples; before W samples have arrived the window is
/// zero-padded on the left.
class FeatureStream {
 public:
  explicit FeatureStream(const AnalysisConfig& config = {});

  FeatureFrame push(std::span<const float> hop);
  void reset();
  const AnalysisConfig& config() const noexcept { return config_; }

 private:
  AnalysisConfig config_;
  std::vector<float> history_;  // max(yin_window, rms_window) most recent samples
};

FeatureFrame analyze_window(std::span<const float> history, const AnalysisConfig& config);

}  // namespace fmtt
