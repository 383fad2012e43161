#include "fmtt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fmtt/error.hpp"

namespace fmtt {

double snr_db(std::span<const float> ref, std::span<const float> est) {
  if (ref.empty()) throw Error(ErrorKind::EmptyInput, "snr_db: empty reference");
  if (ref.size() != est.size()) {
    throw Error(ErrorKind::ShapeMismatch, "snr_db: reference has " + std::to_string(ref.size()) +
                                              " samples, estimate " + std::to_string(est.size()));
  }
  double signal = 0.0;
  double noise = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double r = ref[i];
    const double d = r - static_cast<double>(est[i]);
    signal += r * r;
    noise += d * d;
  }
  if (signal == 0.0) throw Error(ErrorKind::ZeroReference, "snr_db: reference is all zero");
  if (noise < 1e-12) return kSnrCapDb;
  return std::min(kSnrCapDb, 10.0 * std::log10(signal / noise));
}

NoteSegments segment_note(std::span<const float> a, int hop, int sample_rate) {
  const auto on = std::find_if(a.begin(), a.end(), [](float v) { return v > 0.0f; });
  if (on == a.end()) throw Error(ErrorKind::NoNoteFound, "segment_note: a is zero everywhere");
  const auto note_on = static_cast<std::size_t>(on - a.begin());
  std::size_t ramp = a.size();
  for (std::size_t k = note_on + 1; k < a.size(); ++k) {
    if (a[k] < a[k - 1]) {
      ramp = k;
      break;
    }
  }
  if (ramp == a.size()) {
    throw Error(ErrorKind::NoRampFound, "segment_note: a never decreases after frame " +
                                            std::to_string(note_on));
  }
  std::size_t last = note_on;
  for (std::size_t k = a.size(); k-- > note_on;) {
    if (a[k] > 0.0f) {
      last = k;
      break;
    }
  }

  const auto h = static_cast<std::size_t>(hop);
  const auto onset_len = static_cast<std::size_t>(std::llround(0.1 * sample_rate));
  const std::size_t start = note_on * h;
  const std::size_t ramp_start = ramp * h;
  NoteSegments s;
  s.onset = {start, std::min(start + onset_len, ramp_start)};
  s.mid = {s.onset.end, ramp_start};
  s.end = {ramp_start, std::max(ramp_start, (last + 1) * h)};
  return s;
}

std::vector<OlFrame> GruEnvelopeModel::predict(const TrainingTuple& tuple) const {
  const auto k = static_cast<Eigen::Index>(tuple.frames());
  ColMatrix<float> x(2, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    x(0, i) = tuple.a[static_cast<std::size_t>(i)];
    x(1, i) = tuple.f[static_cast<std::size_t>(i)];
  }
  const auto cache = forward_sequence<float>(params_, reset_state<float>(params_.hidden_dim()), x);
  if (cache.y.rows() != static_cast<Eigen::Index>(kNumOperators)) {
    throw Error(ErrorKind::ShapeMismatch, "model does not produce six outputs");
  }
  std::vector<OlFrame> out(tuple.frames());
  for (Eigen::Index i = 0; i < k; ++i) {
    for (std::size_t op = 0; op < kNumOperators; ++op) {
      out[static_cast<std::size_t>(i)][op] = cache.y(static_cast<Eigen::Index>(op), i);
    }
  }
  return out;
}

std::vector<double> f0_from_f(std::span<const float> f) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] > 0.0f) out[k] = 440.0 * std::exp2((127.0 * f[k] - 69.0) / 12.0);
  }
  return out;
}

std::vector<float> render_controls(const VoiceConfig& voice, std::span<const OlFrame> ol,
                                   std::span<const float> f) {
  std::vector<OlFrame> clamped(ol.begin(), ol.end());
  for (auto& frame : clamped) {
    for (auto& v : frame) v = std::clamp(v, 0.0f, 1.0f);
  }
  const auto f0 = f0_from_f(f);
  return render_sequence(voice, clamped, f0);
}

EvalRow evaluate_model(const EnvelopeModel& model, const Dataset& test_set, const Dx7Patch& patch) {
  if (test_set.tuples.empty()) throw Error(ErrorKind::EmptyDataset, "evaluate_model: empty test set");
  const VoiceConfig voice = VoiceConfig::from_patch(patch);

  EvalRow row;
  row.patch_name = patch.name;
  double abs_sum = 0.0;
  std::size_t count = 0;
  std::vector<float> ref_onset, est_onset, ref_mid, est_mid, ref_end, est_end;
  const auto append = [](const std::vector<float>& src, SampleRange r, std::vector<float>& dst) {
    dst.insert(dst.end(), src.begin() + static_cast<std::ptrdiff_t>(r.begin),
               src.begin() + static_cast<std::ptrdiff_t>(r.end));
  };

  for (const auto& tuple : test_set.tuples) {
    const auto pred = model.predict(tuple);
    if (pred.size() != tuple.frames()) {
      throw Error(ErrorKind::ShapeMismatch, "model returned " + std::to_string(pred.size()) +
                                                " frames for a tuple of " +
                                                std::to_string(tuple.frames()));
    }
    for (std::size_t k = 0; k < pred.size(); ++k) {
      for (std::size_t op = 0; op < kNumOperators; ++op) {
        abs_sum += std::abs(static_cast<double>(pred[k][op]) - tuple.ol[k][op]);
      }
    }
    count += pred.size() * kNumOperators;

    NoteSegments seg;
    bool has_release = true;
    try {
      seg = segment_note(tuple.a);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoRampFound) throw;
      // Held to the end of the buffer: everything after the onset is mid.
      const auto on = std::find_if(tuple.a.begin(), tuple.a.end(), [](float v) { return v > 0.0f; });
      const std::size_t start = static_cast<std::size_t>(on - tuple.a.begin()) * kHop;
      const std::size_t stop = tuple.frames() * kHop;
      seg.onset = {start, std::min(start + kOnsetSamples, stop)};
      seg.mid = {seg.onset.end, stop};
      has_release = false;
    }
    const auto ref = render_controls(voice, tuple.ol, tuple.f);
    const auto est = render_controls(voice, pred, tuple.f);
    append(ref, seg.onset, ref_onset);
    append(est, seg.onset, est_onset);
    append(ref, seg.mid, ref_mid);
    append(est, seg.mid, est_mid);
    if (has_release) {
      append(ref, seg.end, ref_end);
      append(est, seg.end, est_end);
    } else {
      row.notes_without_release += 1;
    }
    row.notes += 1;
  }

  row.envelope_l1 = abs_sum / static_cast<double>(count);
  row.snr_onset_db = snr_db(ref_onset, est_onset);
  row.snr_mid_db = snr_db(ref_mid, est_mid);
  row.snr_end_db = snr_db(ref_end, est_end);
  return row;
}

void write_eval_csv(std::span<const EvalRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << "patch,envelope_l1,snr_onset_db,snr_mid_db,snr_end_db\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, ",%.6e,%.3f,%.3f,%.3f\n", r.envelope_l1, r.snr_onset_db,
                  r.snr_mid_db, r.snr_end_db);
    out << '"' << r.patch_name << '"' << line;
  }
}

}  // namespace fmtt
