#pragma once

// End-to-end workflows behind the command-line subcommands.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fmtt/dataset.hpp"
#include "fmtt/features.hpp"
#include "fmtt/fm_synth.hpp"
#include "fmtt/gru.hpp"
#include "fmtt/metrics.hpp"
#include "fmtt/patch.hpp"
#include "fmtt/trainer.hpp"

namespace fmtt {

/// Budget for one 64-sample frame at 44.1 kHz, in milliseconds.
inline constexpr double kFrameBudgetMs = 1000.0 / kFrameRate;

Dx7Patch load_patch(const std::filesystem::path& bank, int voice);

/// `<prefix>.train.fmtd` and friends.
std::filesystem::path split_path(const std::filesystem::path& prefix, const std::string& split);

struct GenOptions {
  std::filesystem::path bank;
  int voice = 0;
  std::size_t notes = 1000;
  std::size_t frames = 1000;
  std::uint64_t seed = 0;
  std::filesystem::path out;  // prefix
};

struct GenResult {
  std::array<std::filesystem::path, 3> files;
  std::array<std::size_t, 3> sizes{};
  double occupancy = 0.0;
};

GenResult cmd_gen(const GenOptions& options);

struct TrainOptions {
  std::filesystem::path dataset;  // prefix given to gen
  int hidden = 128;
  TrainConfig train;
  std::filesystem::path out;
  std::filesystem::path loss_csv;  // defaults to <out>.loss.csv
};

TrainResult cmd_train(const TrainOptions& options, const ReportCallback& on_report = {});

struct EvalOptions {
  std::filesystem::path dataset;  // test file, or a prefix holding <prefix>.test.fmtd
  std::filesystem::path model;
  std::filesystem::path bank;
  int voice = 0;
  std::filesystem::path out;
};

EvalRow cmd_eval(const EvalOptions& options);

struct RenderOptions {
  bool clamp_outputs = true;
  bool reset_on_silence = true;
  AnalysisConfig analysis;
};

/// Streaming tone transfer: features, GRU and synth, one hop at a time.
///
/// A frame whose features are a = 0 and f = 0 runs from a zeroed hidden state
/// and leaves the stream in its rest state (zero hidden state, oscillators
/// reset), which is also the state a fresh stream starts in. Output after
/// enough silence is therefore independent of what came before.
class ToneTransfer {
 public:
  ToneTransfer(GruParams<float> params, const Dx7Patch& patch, RenderOptions options = {});

  /// Consumes one hop of input and writes one hop of output.
  void process(std::span<const float> in, std::span<float> out);
  void reset();

  const FeatureFrame& last_features() const noexcept { return features_; }
  const OpLevels& last_controls() const noexcept { return synth_.last_ol; }
  int hop() const noexcept { return options_.analysis.hop; }

 private:
  GruParams<float> params_;
  VoiceConfig voice_;
  RenderOptions options_;
  FeatureStream stream_;
  Vector<float> h_;
  SynthState synth_;
  SynthState rest_;
  FeatureFrame features_;
};

/// Whole-buffer render; output has ceil(N / hop) * hop samples.
std::vector<float> tone_transfer(const GruParams<float>& params, const Dx7Patch& patch,
                                 std::span<const float> input, const RenderOptions& options = {});

struct RenderCmdOptions {
  std::filesystem::path in;
  std::filesystem::path model;
  std::filesystem::path bank;
  int voice = 0;
  std::filesystem::path out;
  WavEncoding encoding = WavEncoding::Float32;
  RenderOptions render;
};

/// Returns the number of samples written.
std::size_t cmd_render(const RenderCmdOptions& options);

struct BenchOptions {
  std::optional<std::filesystem::path> model;
  int hidden = 128;  // used with a random model when no file is given
  std::filesystem::path bank;
  int voice = 0;
  std::size_t frames = 10000;
  std::uint64_t seed = 0;
};

struct BenchReport {
  int hidden = 0;
  std::size_t frames = 0;
  double mean_ms = 0.0;
  double p99_ms = 0.0;
  double budget_ms = kFrameBudgetMs;
  double realtime_factor = 0.0;  // budget / mean
};

BenchReport cmd_bench(const BenchOptions& options);
BenchReport bench_tone_transfer(const GruParams<float>& params, const Dx7Patch& patch, std::size_t frames);
std::string format_bench_report(const BenchReport& report);

}  // namespace fmtt
