#include "fmtt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "fmtt/audio.hpp"
#include "fmtt/error.hpp"

namespace fmtt {

Dx7Patch load_patch(const std::filesystem::path& bank, int voice) {
  return unpack_voice(read_sysex_file(bank), voice);
}

std::filesystem::path split_path(const std::filesystem::path& prefix, const std::string& split) {
  return std::filesystem::path(prefix.string() + "." + split + ".fmtd");
}

GenResult cmd_gen(const GenOptions& options) {
  const Dx7Patch patch = load_patch(options.bank, options.voice);
  const Dataset ds = build_dataset(patch, options.notes, options.frames, options.seed);
  const DatasetSplit split = split_dataset(ds, options.seed);

  GenResult result;
  result.occupancy = mean_occupancy(ds);
  const std::array<const Dataset*, 3> parts{&split.train, &split.valid, &split.test};
  const std::array<const char*, 3> names{"train", "valid", "test"};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    result.files[i] = split_path(options.out, names[i]);
    result.sizes[i] = parts[i]->size();
    save_dataset(*parts[i], result.files[i]);
  }
  return result;
}

TrainResult cmd_train(const TrainOptions& options, const ReportCallback& on_report) {
  const Dataset train_set = load_dataset(split_path(options.dataset, "train"));
  const Dataset valid_set = load_dataset(split_path(options.dataset, "valid"));
  const ModelConfig model{2, options.hidden, static_cast<int>(kNumOperators)};
  TrainResult result = train(train_set, valid_set, model, options.train, on_report);
  save_model(result.params, options.out);
  const auto csv = options.loss_csv.empty() ? std::filesystem::path(options.out.string() + ".loss.csv")
                                            : options.loss_csv;
  write_loss_csv(result.reports, csv);
  return result;
}

EvalRow cmd_eval(const EvalOptions& options) {
  const auto path = std::filesystem::is_regular_file(options.dataset)
                        ? options.dataset
                        : split_path(options.dataset, "test");
  const Dataset test_set = load_dataset(path);
  GruParams<float> params = load_model(options.model);
  const ModelConfig config = params.config();
  if (config.input_dim != 2 || config.output_dim != static_cast<int>(kNumOperators)) {
    throw Error(ErrorKind::ShapeMismatch, options.model.string() + ": model maps " +
                                              std::to_string(config.input_dim) + " inputs to " +
                                              std::to_string(config.output_dim) + " outputs");
  }
  const Dx7Patch patch = load_patch(options.bank, options.voice);
  const EvalRow row = evaluate_model(GruEnvelopeModel(std::move(params)), test_set, patch);
  if (!options.out.empty()) write_eval_csv(std::span(&row, 1), options.out);
  return row;
}

namespace {

OpLevels to_controls(const Vector<float>& y, bool clamp) {
  OpLevels ol{};
  for (std::size_t i = 0; i < kNumOperators; ++i) {
    const double v = y(static_cast<Eigen::Index>(i));
    ol[i] = clamp ? std::clamp(v, 0.0, 1.0) : v;
  }
  return ol;
}

}  // namespace

ToneTransfer::ToneTransfer(GruParams<float> params, const Dx7Patch& patch, RenderOptions options)
    : params_(std::move(params)),
      voice_(VoiceConfig::from_patch(patch)),
      options_(options),
      stream_(options.analysis) {
  const ModelConfig config = params_.config();
  if (config.input_dim != 2 || config.output_dim != static_cast<int>(kNumOperators)) {
    throw Error(ErrorKind::ShapeMismatch, "tone transfer needs a 2-input, 6-output model");
  }
  if (options_.analysis.sample_rate != kSampleRate) {
    throw Error(ErrorKind::UnsupportedSampleRate,
                std::to_string(options_.analysis.sample_rate) + " Hz; only 44100 Hz is supported");
  }
  // The rest state is what a silent frame leaves behind.
  const auto silent = forward_frame<float>(params_, reset_state<float>(params_.hidden_dim()), 0.0f, 0.0f);
  rest_.prime(to_controls(silent.y, options_.clamp_outputs), 0.0);
  reset();
}

void ToneTransfer::reset() {
  stream_.reset();
  h_ = reset_state<float>(params_.hidden_dim());
  synth_ = rest_;
  features_ = {};
}

void ToneTransfer::process(std::span<const float> in, std::span<float> out) {
  const auto hop = static_cast<std::size_t>(options_.analysis.hop);
  if (in.size() != hop || out.size() != hop) {
    throw Error(ErrorKind::ShapeMismatch, "process: expected " + std::to_string(hop) + " samples");
  }
  features_ = stream_.push(in);
  const bool silent = options_.reset_on_silence && features_.a == 0.0 && features_.f == 0.0;
  if (silent) h_.setZero();
  const auto frame = forward_frame<float>(params_, h_, static_cast<float>(features_.a),
                                          static_cast<float>(features_.f));
  render_window(voice_, synth_, to_controls(frame.y, options_.clamp_outputs), features_.f0, out);
  if (silent) {
    h_.setZero();
    synth_ = rest_;
  } else {
    h_ = frame.h;
  }
}

std::vector<float> tone_transfer(const GruParams<float>& params, const Dx7Patch& patch,
                                 std::span<const float> input, const RenderOptions& options) {
  ToneTransfer tt(params, patch, options);
  const auto hop = static_cast<std::size_t>(tt.hop());
  const std::size_t frames = (input.size() + hop - 1) / hop;
  std::vector<float> padded(frames * hop, 0.0f);
  std::copy(input.begin(), input.end(), padded.begin());
  std::vector<float> out(frames * hop);
  for (std::size_t k = 0; k < frames; ++k) {
    tt.process(std::span(padded).subspan(k * hop, hop), std::span(out).subspan(k * hop, hop));
  }
  return out;
}

std::size_t cmd_render(const RenderCmdOptions& options) {
  const AudioBuffer input = read_wav(options.in);
  if (input.sample_rate != kSampleRate) {
    throw Error(ErrorKind::UnsupportedSampleRate, options.in.string() + ": " +
                                                      std::to_string(input.sample_rate) +
                                                      " Hz; only 44100 Hz is supported");
  }
  const GruParams<float> params = load_model(options.model);
  const Dx7Patch patch = load_patch(options.bank, options.voice);
  AudioBuffer output;
  output.sample_rate = kSampleRate;
  output.samples = tone_transfer(params, patch, input.samples, options.render);
  write_wav(output, options.out, options.encoding);
  return output.samples.size();
}

BenchReport bench_tone_transfer(const GruParams<float>& params, const Dx7Patch& patch, std::size_t frames) {
  using clock = std::chrono::steady_clock;
  ToneTransfer tt(params, patch);
  const auto hop = static_cast<std::size_t>(tt.hop());

  // A gliding sine with a slow tremolo keeps YIN and the synth busy.
  std::vector<float> in(hop), out(hop);
  double phase = 0.0;
  std::size_t t = 0;
  std::vector<double> ms(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    for (auto& s : in) {
      const double sec = static_cast<double>(t++) / kSampleRate;
      const double f = 220.0 * std::exp2(std::sin(2.0 * std::numbers::pi * 0.1 * sec));
      phase += 2.0 * std::numbers::pi * f / kSampleRate;
      s = static_cast<float>(0.4 * (0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 0.5 * sec)) * std::sin(phase));
    }
    const auto start = clock::now();
    tt.process(in, out);
    ms[k] = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  }

  BenchReport r;
  r.hidden = params.hidden_dim();
  r.frames = frames;
  if (frames == 0) return r;
  double sum = 0.0;
  for (double v : ms) sum += v;
  r.mean_ms = sum / static_cast<double>(frames);
  const auto p99 = std::min(frames - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(frames))) - 1);
  std::nth_element(ms.begin(), ms.begin() + static_cast<std::ptrdiff_t>(p99), ms.end());
  r.p99_ms = ms[p99];
  r.realtime_factor = r.mean_ms > 0.0 ? r.budget_ms / r.mean_ms : 0.0;
  return r;
}

BenchReport cmd_bench(const BenchOptions& options) {
  const GruParams<float> params =
      options.model ? load_model(*options.model)
                    : init_params({2, options.hidden, static_cast<int>(kNumOperators)}, options.seed);
  return bench_tone_transfer(params, load_patch(options.bank, options.voice), options.frames);
}

std::string format_bench_report(const BenchReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "hidden=%d frames=%zu mean_ms=%.4f p99_ms=%.4f budget_ms=%.4f realtime_factor=%.2f\n",
                r.hidden, r.frames, r.mean_ms, r.p99_ms, r.budget_ms, r.realtime_factor);
  return buf;
}

}  // namespace fmtt
