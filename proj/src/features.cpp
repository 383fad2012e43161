#include "fmtt/features.hpp"

#include <algorithm>
#include <cmath>

#include "fmtt/error.hpp"

namespace fmtt {

double rms_norm(std::span<const float> window, double db_floor) noexcept {
  if (window.empty()) return 0.0;
  double power = 0.0;
  for (float s : window) power += static_cast<double>(s) * s;
  power /= static_cast<double>(window.size());
  if (power <= 0.0) return 0.0;
  const double db = std::max(db_floor, 10.0 * std::log10(power));
  return std::clamp(1.0 + db / -db_floor, 0.0, 1.0);
}

double yin_f0(std::span<const float> window, const AnalysisConfig& config) {
  const std::size_t w = static_cast<std::size_t>(config.yin_window);
  if (window.size() != w) {
    throw Error(ErrorKind::ShapeMismatch, "yin window has " + std::to_string(window.size()) +
                                              " samples, expected " + std::to_string(w));
  }
  const std::size_t half = w / 2;
  const auto min_lag = static_cast<std::size_t>(std::ceil(config.sample_rate / config.max_f0));

  // Difference function d(tau) = sum_j (x_j - x_{j+tau})^2 for tau in [0, half].
  std::vector<double> diff(half + 1, 0.0);
  for (std::size_t tau = 1; tau <= half; ++tau) {
    // Four partial sums keep the reduction off a single dependency chain.
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t j = 0;
    for (; j + 4 <= half; j += 4) {
      for (std::size_t u = 0; u < 4; ++u) {
        const double d = static_cast<double>(window[j + u]) - window[j + u + tau];
        acc[u] += d * d;
      }
    }
    for (; j < half; ++j) {
      const double d = static_cast<double>(window[j]) - window[j + tau];
      acc[0] += d * d;
    }
    diff[tau] = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  }

  // Cumulative-mean-normalised difference.
  std::vector<double> cmnd(half + 1, 1.0);
  double running = 0.0;
  for (std::size_t tau = 1; tau <= half; ++tau) {
    running += diff[tau];
    cmnd[tau] = running > 0.0 ? diff[tau] * static_cast<double>(tau) / running : 1.0;
  }

  std::size_t tau = std::max<std::size_t>(min_lag, 2);
  for (; tau < half; ++tau) {
    if (cmnd[tau] < config.yin_threshold) break;
  }
  if (tau >= half) return 0.0;
  while (tau + 1 < half && cmnd[tau + 1] < cmnd[tau]) ++tau;
  // A dip still falling at the end of the lag range is not a period.
  if (tau + 1 >= half) return 0.0;

  // Parabolic refinement on the raw difference function.
  const double left = diff[tau - 1];
  const double mid = diff[tau];
  const double right = diff[tau + 1];
  const double denom = left - 2.0 * mid + right;
  double shift = 0.0;
  if (denom > 0.0) shift = std::clamp(0.5 * (left - right) / denom, -1.0, 1.0);
  return config.sample_rate / (static_cast<double>(tau) + shift);
}

double f_norm(double f0) noexcept {
  if (!(f0 > 0.0)) return 0.0;
  return std::clamp((12.0 * std::log2(f0 / 220.0) + 57.01) / 127.0, 0.0, 1.0);
}

double note_to_hz(double note) noexcept { return 440.0 * std::exp2((note - 69.0) / 12.0); }

FeatureFrame analyze_window(std::span<const float> history, const AnalysisConfig& config) {
  const auto yw = static_cast<std::size_t>(config.yin_window);
  const auto rw = static_cast<std::size_t>(config.rms_window);
  FeatureFrame frame;
  frame.a = rms_norm(history.last(rw), config.db_floor);
  frame.f0 = yin_f0(history.last(yw), config);
  frame.f = f_norm(frame.f0);
  return frame;
}

std::vector<FeatureFrame> analyze(const AudioBuffer& audio, const AnalysisConfig& config) {
  if (audio.sample_rate != config.sample_rate || config.sample_rate != kSampleRate) {
    throw Error(ErrorKind::UnsupportedSampleRate,
                std::to_string(audio.sample_rate) + " Hz input, pipeline runs at 44100 Hz");
  }
  // Same framing as FeatureStream: one frame per whole hop, window ending at
  // the hop, zero history before the first sample.
  FeatureStream stream(config);
  const std::size_t hop = static_cast<std::size_t>(config.hop);
  const std::size_t count = audio.samples.size() / hop;
  std::vector<FeatureFrame> frames;
  frames.reserve(count);
  const std::span<const float> all(audio.samples);
  for (std::size_t k = 0; k < count; ++k) frames.push_back(stream.push(all.subspan(k * hop, hop)));
  return frames;
}

FeatureStream::FeatureStream(const AnalysisConfig& config) : config_(config) {
  if (config_.hop < 1 || config_.yin_window < config_.hop || config_.rms_window < config_.hop) {
    throw Error(ErrorKind::InvalidArgument, "analysis windows must be at least one hop");
  }
  reset();
}

void FeatureStream::reset() {
  history_.assign(static_cast<std::size_t>(std::max(config_.yin_window, config_.rms_window)), 0.0f);
}

FeatureFrame FeatureStream::push(std::span<const float> hop) {
  if (hop.size() != static_cast<std::size_t>(config_.hop)) {
    throw Error(ErrorKind::ShapeMismatch, "expected hops of " + std::to_string(config_.hop) + " samples");
  }
  std::shift_left(history_.begin(), history_.end(), static_cast<std::ptrdiff_t>(hop.size()));
  std::copy(hop.begin(), hop.end(), history_.end() - static_cast<std::ptrdiff_t>(hop.size()));
  return analyze_window(history_, config_);
}

}  // namespace fmtt
