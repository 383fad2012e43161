// Python bindings for the fmtt core.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fmtt/audio.hpp"
#include "fmtt/dataset.hpp"
#include "fmtt/envelope.hpp"
#include "fmtt/error.hpp"
#include "fmtt/features.hpp"
#include "fmtt/fm_synth.hpp"
#include "fmtt/gru.hpp"
#include "fmtt/metrics.hpp"
#include "fmtt/patch.hpp"
#include "fmtt/pipeline.hpp"
#include "fmtt/trainer.hpp"

namespace py = pybind11;
using namespace fmtt;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<float> to_vector(const FloatArray& a) {
  if (a.ndim() != 1) throw Error(ErrorKind::ShapeMismatch, "expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

FloatArray to_array(const std::vector<float>& v) {
  FloatArray out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

FloatArray ol_to_array(const std::vector<OlFrame>& ol) {
  FloatArray out({static_cast<py::ssize_t>(ol.size()), static_cast<py::ssize_t>(kNumOperators)});
  float* p = out.mutable_data();
  for (const auto& fr : ol) p = std::copy(fr.begin(), fr.end(), p);
  return out;
}

std::vector<OlFrame> ol_from_array(const FloatArray& a) {
  if (a.ndim() != 2 || a.shape(1) != static_cast<py::ssize_t>(kNumOperators)) {
    throw Error(ErrorKind::ShapeMismatch, "expected an (K, 6) array of operator levels");
  }
  std::vector<OlFrame> out(static_cast<std::size_t>(a.shape(0)));
  const float* p = a.data();
  for (auto& fr : out) {
    std::copy(p, p + kNumOperators, fr.begin());
    p += kNumOperators;
  }
  return out;
}

py::bytes to_bytes(const std::vector<std::uint8_t>& b) {
  return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict eval_row_dict(const EvalRow& r) {
  py::dict d;
  d["patch"] = r.patch_name;
  d["envelope_l1"] = r.envelope_l1;
  d["snr_onset_db"] = r.snr_onset_db;
  d["snr_mid_db"] = r.snr_mid_db;
  d["snr_end_db"] = r.snr_end_db;
  d["notes"] = r.notes;
  d["notes_without_release"] = r.notes_without_release;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fmtt, m) {
  m.doc() = "FM envelope learning and tone transfer";

  static py::exception<Error> error_type(m, "FmttError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(error_type.ptr())(e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  m.attr("SAMPLE_RATE") = kSampleRate;
  m.attr("HOP") = kHop;
  m.attr("FRAME_RATE") = kFrameRate;

  // Patches.
  py::enum_<FreqMode>(m, "FreqMode").value("RATIO", FreqMode::Ratio).value("FIXED", FreqMode::Fixed);

  py::class_<OperatorParams>(m, "OperatorParams")
      .def(py::init<>())
      .def_readwrite("eg_rates", &OperatorParams::eg_rates)
      .def_readwrite("eg_levels", &OperatorParams::eg_levels)
      .def_readwrite("freq_mode", &OperatorParams::freq_mode)
      .def_readwrite("freq_coarse", &OperatorParams::freq_coarse)
      .def_readwrite("freq_fine", &OperatorParams::freq_fine)
      .def_readwrite("detune", &OperatorParams::detune)
      .def_readwrite("output_level", &OperatorParams::output_level)
      .def_readwrite("velocity_sensitivity", &OperatorParams::velocity_sensitivity)
      .def(py::self == py::self);

  py::class_<Dx7Patch>(m, "Dx7Patch")
      .def(py::init<>())
      .def_readwrite("name", &Dx7Patch::name)
      .def_readwrite("algorithm", &Dx7Patch::algorithm)
      .def_readwrite("feedback", &Dx7Patch::feedback)
      .def_readwrite("operators", &Dx7Patch::operators)
      .def(py::self == py::self)
      .def("summary", &patch_summary)
      .def("__repr__", [](const Dx7Patch& p) { return "<Dx7Patch '" + p.name + "' alg " + std::to_string(p.algorithm) + ">"; });

  m.def("parse_bank", [](const py::bytes& data) {
    const auto bank = parse_sysex_bank(from_bytes(data));
    std::vector<Dx7Patch> out;
    for (int i = 0; i < static_cast<int>(kBankVoices); ++i) out.push_back(unpack_voice(bank, i));
    return out;
  }, py::arg("data"), "Parses a 4104-byte 32-voice bulk dump into 32 patches.");
  m.def("load_patch", &load_patch, py::arg("bank"), py::arg("voice"));
  m.def("build_bank", [](const std::vector<Dx7Patch>& patches) {
    if (patches.size() != kBankVoices) throw Error(ErrorKind::WrongLength, "a bank holds exactly 32 voices");
    std::array<PackedVoice, kBankVoices> voices{};
    for (std::size_t i = 0; i < kBankVoices; ++i) voices[i] = pack_voice(patches[i]);
    return to_bytes(build_sysex_bank(voices));
  }, py::arg("patches"));
  m.def("op_frequency", &op_frequency, py::arg("op"), py::arg("f0"));

  // Envelopes.
  m.def("eg_render", [](const Dx7Patch& patch, int velocity, std::size_t note_on, std::size_t note_off,
                        std::size_t total_frames) {
    const auto levels = eg_render(eg_configs(patch), velocity, note_on, note_off, total_frames);
    py::array_t<double> out({static_cast<py::ssize_t>(levels.size()), static_cast<py::ssize_t>(kNumOperators)});
    double* p = out.mutable_data();
    for (const auto& row : levels) p = std::copy(row.begin(), row.end(), p);
    return out;
  }, py::arg("patch"), py::arg("velocity"), py::arg("note_on"), py::arg("note_off"), py::arg("total_frames"),
     "Six operator levels on the [0, 2] scale, one row per frame.");

  // Datasets.
  py::class_<NoteEvent>(m, "NoteEvent")
      .def(py::init<int, int, int>(), py::arg("velocity") = 127, py::arg("note") = 60,
           py::arg("duration_frames") = kMinNoteFrames)
      .def_readwrite("velocity", &NoteEvent::velocity)
      .def_readwrite("note", &NoteEvent::note)
      .def_readwrite("duration_frames", &NoteEvent::duration_frames);

  py::class_<TrainingTuple>(m, "TrainingTuple")
      .def_property_readonly("a", [](const TrainingTuple& t) { return to_array(t.a); })
      .def_property_readonly("f", [](const TrainingTuple& t) { return to_array(t.f); })
      .def_property_readonly("ol", [](const TrainingTuple& t) { return ol_to_array(t.ol); })
      .def_readonly("truncated", &TrainingTuple::truncated)
      .def("__len__", &TrainingTuple::frames);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("patch_name", [](const Dataset& d) { return d.meta.patch_name; })
      .def_property_readonly("frames", [](const Dataset& d) { return d.meta.frames; })
      .def_property_readonly("seed", [](const Dataset& d) { return d.meta.seed; })
      .def_readonly("tuples", &Dataset::tuples)
      .def("__len__", &Dataset::size)
      .def("__getitem__", [](const Dataset& d, std::size_t i) {
        if (i >= d.size()) throw py::index_error();
        return d.tuples[i];
      })
      .def("occupancy", &mean_occupancy)
      .def("save", &save_dataset, py::arg("path"))
      .def(py::self == py::self);

  m.def("gen_notes", &gen_notes, py::arg("n"), py::arg("seed"));
  m.def("render_tuple", &render_tuple, py::arg("patch"), py::arg("event"), py::arg("frames"), py::arg("padding_seed"));
  m.def("build_dataset", &build_dataset, py::arg("patch"), py::arg("notes"), py::arg("frames") = 1000,
        py::arg("seed") = 0);
  m.def("split_dataset", [](const Dataset& ds, std::uint64_t seed) {
    auto s = split_dataset(ds, seed);
    return py::make_tuple(std::move(s.train), std::move(s.valid), std::move(s.test));
  }, py::arg("dataset"), py::arg("seed"));
  m.def("load_dataset", &load_dataset, py::arg("path"));

  // Model and training.
  py::class_<GruParams<float>>(m, "GruParams")
      .def_readwrite("w_in", &GruParams<float>::w_in)
      .def_readwrite("u_rec", &GruParams<float>::u_rec)
      .def_readwrite("b_in", &GruParams<float>::b_in)
      .def_readwrite("c_n", &GruParams<float>::c_n)
      .def_readwrite("w_out", &GruParams<float>::w_out)
      .def_readwrite("b_out", &GruParams<float>::b_out)
      .def_property_readonly("hidden_dim", &GruParams<float>::hidden_dim)
      .def_property_readonly("parameter_count", &GruParams<float>::parameter_count)
      .def("save", [](const GruParams<float>& p, const std::filesystem::path& path) { save_model(p, path); })
      .def("forward", [](const GruParams<float>& p, const FloatArray& a, const FloatArray& f) {
        const auto av = to_vector(a);
        const auto fv = to_vector(f);
        if (av.size() != fv.size()) throw Error(ErrorKind::ShapeMismatch, "a and f differ in length");
        ColMatrix<float> x(2, static_cast<Eigen::Index>(av.size()));
        for (std::size_t k = 0; k < av.size(); ++k) {
          x(0, static_cast<Eigen::Index>(k)) = av[k];
          x(1, static_cast<Eigen::Index>(k)) = fv[k];
        }
        const auto c = forward_sequence<float>(p, reset_state<float>(p.hidden_dim()), x);
        return RowMatrix<float>(c.y.transpose());
      }, py::arg("a"), py::arg("f"), "Runs from a zero state; returns (K, 6) outputs.")
      .def(py::self == py::self);

  m.def("init_params", [](int hidden, std::uint64_t seed) { return init_params({2, hidden, 6}, seed); },
        py::arg("hidden") = 128, py::arg("seed") = 0);
  m.def("load_model", &load_model, py::arg("path"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("lr_decay", &TrainConfig::lr_decay)
      .def_readwrite("decay_every", &TrainConfig::decay_every)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("total_steps", &TrainConfig::total_steps)
      .def_readwrite("report_every", &TrainConfig::report_every)
      .def_readwrite("clip_grad_norm", &TrainConfig::clip_grad_norm)
      .def_readwrite("keep_best_valid", &TrainConfig::keep_best_valid)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<LossReport>(m, "LossReport")
      .def_readonly("step", &LossReport::step)
      .def_readonly("train_l1", &LossReport::train_l1)
      .def_readonly("valid_l1", &LossReport::valid_l1)
      .def_readonly("learning_rate", &LossReport::learning_rate);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("reports", &TrainResult::reports)
      .def_readonly("best_step", &TrainResult::best_step)
      .def_property_readonly("step_losses", [](const TrainResult& r) { return to_array(r.step_losses); });

  m.def("learning_rate_at", &learning_rate_at, py::arg("config"), py::arg("step"));
  m.def("train", [](const Dataset& train_set, const Dataset& valid_set, int hidden, const TrainConfig& config,
                    const ReportCallback& on_report) {
    py::gil_scoped_release release;
    ReportCallback cb;
    if (on_report) {
      cb = [&on_report](const LossReport& r) {
        py::gil_scoped_acquire acquire;
        on_report(r);
      };
    }
    return train(train_set, valid_set, {2, hidden, 6}, config, cb);
  }, py::arg("train_set"), py::arg("valid_set"), py::arg("hidden") = 128, py::arg("config") = TrainConfig{},
     py::arg("on_report") = ReportCallback{});
  m.def("dataset_l1", &dataset_l1, py::arg("params"), py::arg("dataset"));

  // Metrics.
  m.def("snr_db", [](const FloatArray& ref, const FloatArray& est) { return snr_db(to_vector(ref), to_vector(est)); },
        py::arg("ref"), py::arg("est"));
  m.def("evaluate", [](const GruParams<float>& params, const Dataset& test_set, const Dx7Patch& patch) {
    return eval_row_dict(evaluate_model(GruEnvelopeModel(params), test_set, patch));
  }, py::arg("params"), py::arg("test_set"), py::arg("patch"));
  m.def("evaluate_oracle", [](const Dataset& test_set, const Dx7Patch& patch) {
    return eval_row_dict(evaluate_model(OracleEnvelopeModel{}, test_set, patch));
  }, py::arg("test_set"), py::arg("patch"), "Scores the stored ground truth against itself.");

  // Features and synthesis.
  m.def("rms_norm", [](const FloatArray& w) { return rms_norm(to_vector(w)); }, py::arg("window"));
  m.def("yin_f0", [](const FloatArray& w) { return yin_f0(to_vector(w)); }, py::arg("window"));
  m.def("f_norm", &f_norm, py::arg("f0"));
  m.def("analyze", [](const FloatArray& samples, int sample_rate) {
    const auto frames = analyze(AudioBuffer{sample_rate, to_vector(samples)});
    py::array_t<double> out({static_cast<py::ssize_t>(frames.size()), static_cast<py::ssize_t>(3)});
    double* p = out.mutable_data();
    for (const auto& fr : frames) {
      *p++ = fr.a;
      *p++ = fr.f;
      *p++ = fr.f0;
    }
    return out;
  }, py::arg("samples"), py::arg("sample_rate") = kSampleRate, "Columns are a, f and f0 in Hz.");

  m.def("render_controls", [](const Dx7Patch& patch, const FloatArray& ol, const DoubleArray& f0) {
    if (f0.ndim() != 1) throw Error(ErrorKind::ShapeMismatch, "f0 must be 1-D");
    const std::vector<double> f0v(f0.data(), f0.data() + f0.size());
    return to_array(render_sequence(VoiceConfig::from_patch(patch), ol_from_array(ol), f0v));
  }, py::arg("patch"), py::arg("ol"), py::arg("f0"), "Renders (K, 6) levels in [0, 1] and K pitches in Hz.");

  m.def("tone_transfer", [](const GruParams<float>& params, const Dx7Patch& patch, const FloatArray& input,
                            bool clamp_outputs, bool reset_on_silence) {
    RenderOptions opts;
    opts.clamp_outputs = clamp_outputs;
    opts.reset_on_silence = reset_on_silence;
    const auto in = to_vector(input);
    std::vector<float> out;
    {
      py::gil_scoped_release release;
      out = tone_transfer(params, patch, in, opts);
    }
    return to_array(out);
  }, py::arg("params"), py::arg("patch"), py::arg("input"), py::arg("clamp_outputs") = true,
     py::arg("reset_on_silence") = true);

  m.def("bench", [](const GruParams<float>& params, const Dx7Patch& patch, std::size_t frames) {
    const auto r = bench_tone_transfer(params, patch, frames);
    py::dict d;
    d["hidden"] = r.hidden;
    d["frames"] = r.frames;
    d["mean_ms"] = r.mean_ms;
    d["p99_ms"] = r.p99_ms;
    d["budget_ms"] = r.budget_ms;
    d["realtime_factor"] = r.realtime_factor;
    return d;
  }, py::arg("params"), py::arg("patch"), py::arg("frames") = 1000);

  // Audio files.
  m.def("read_wav", [](const std::filesystem::path& path) {
    auto buf = read_wav(path);
    return py::make_tuple(to_array(buf.samples), buf.sample_rate);
  }, py::arg("path"), "Returns (mono float32 samples, sample rate).");
  m.def("write_wav", [](const std::filesystem::path& path, const FloatArray& samples, int sample_rate, bool pcm16) {
    write_wav(AudioBuffer{sample_rate, to_vector(samples)}, path, pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32);
  }, py::arg("path"), py::arg("samples"), py::arg("sample_rate") = kSampleRate, py::arg("pcm16") = false);
}
