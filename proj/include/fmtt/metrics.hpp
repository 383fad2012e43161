#pragma once

// Envelope error and segmented audio SNR on a test split.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fmtt/dataset.hpp"
#include "fmtt/fm_synth.hpp"
#include "fmtt/gru.hpp"
#include "fmtt/patch.hpp"

namespace fmtt {

inline constexpr double kSnrCapDb = 200.0;
inline constexpr std::size_t kOnsetSamples = 4410;  // 100 ms at 44.1 kHz

/// 10 log10(sum ref^2 / sum (ref - est)^2), capped at kSnrCapDb when the
/// error power is below 1e-12.
double snr_db(std::span<const float> ref, std::span<const float> est);

struct SampleRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }
  bool operator==(const SampleRange&) const = default;
};

struct NoteSegments {
  SampleRange onset;
  SampleRange mid;
  SampleRange end;  // empty when the note has no release frames
};

/// Onset is the first 100 ms after note-on (cut at the ramp start), mid runs
/// up to the ramp start and end from the ramp start to the last frame with
/// a > 0.
NoteSegments segment_note(std::span<const float> a, int hop = kHop, int sample_rate = kSampleRate);

/// Maps a tuple's conditioning to six envelope controls per frame.
class EnvelopeModel {
 public:
  virtual ~EnvelopeModel() = default;
  virtual std::vector<OlFrame> predict(const TrainingTuple& tuple) const = 0;
};

class GruEnvelopeModel final : public EnvelopeModel {
 public:
  explicit GruEnvelopeModel(GruParams<float> params) : params_(std::move(params)) {}
  std::vector<OlFrame> predict(const TrainingTuple& tuple) const override;
  const GruParams<float>& params() const noexcept { return params_; }

 private:
  GruParams<float> params_;
};

/// Returns the stored ground truth.
class OracleEnvelopeModel final : public EnvelopeModel {
 public:
  std::vector<OlFrame> predict(const TrainingTuple& tuple) const override { return tuple.ol; }
};

/// 440 * 2^((127 f - 69) / 12) for f > 0, else 0.
std::vector<double> f0_from_f(std::span<const float> f);

/// Renders a control sequence with values clamped to [0, 1].
std::vector<float> render_controls(const VoiceConfig& voice, std::span<const OlFrame> ol,
                                   std::span<const float> f);

struct EvalRow {
  std::string patch_name;
  double envelope_l1 = 0.0;
  double snr_onset_db = 0.0;
  double snr_mid_db = 0.0;
  double snr_end_db = 0.0;
  std::size_t notes = 0;
  std::size_t notes_without_release = 0;
};

EvalRow evaluate_model(const EnvelopeModel& model, const Dataset& test_set, const Dx7Patch& patch);

void write_eval_csv(std::span<const EvalRow> rows, const std::filesystem::path& path);

}  // namespace fmtt
