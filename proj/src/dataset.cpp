#include "fmtt/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "binary_io.hpp"
#include "fmtt/envelope.hpp"
#include "fmtt/error.hpp"

namespace fmtt {

namespace {

constexpr char kMagic[] = "FMTD";
constexpr std::size_t kNameBytes = 10;
// Release tails are simulated for at most this many multiples of the tuple
// length; an envelope still sounding after that is treated as endless.
constexpr std::size_t kTailHorizonFactor = 8;

bool any_live(const OlFrame& frame) {
  return std::any_of(frame.begin(), frame.end(), [](float v) { return v >= kOlSilence; });
}

std::string fixed_name(const std::string& name) {
  std::string out = name.substr(0, kNameBytes);
  out.resize(kNameBytes, ' ');
  return out;
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& indices) {
  Dataset out;
  out.meta = ds.meta;
  out.tuples.reserve(indices.size());
  for (auto i : indices) out.tuples.push_back(ds.tuples[i]);
  return out;
}

}  // namespace

std::vector<NoteEvent> gen_notes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> velocity(1, 127);
  std::uniform_int_distribution<int> note(0, 127);
  std::uniform_int_distribution<int> duration(kMinNoteFrames, kMaxNoteFrames);
  std::vector<NoteEvent> events(n);
  for (auto& e : events) {
    e.velocity = velocity(rng);
    e.note = note(rng);
    e.duration_frames = duration(rng);
  }
  return events;
}

TrainingTuple render_tuple(const Dx7Patch& patch, const NoteEvent& event, std::size_t frames,
                           std::uint64_t padding_seed) {
  if (event.velocity < 1 || event.velocity > 127) {
    throw Error(ErrorKind::VelocityOutOfRange, "velocity " + std::to_string(event.velocity));
  }
  if (event.note < 0 || event.note > 127) {
    throw Error(ErrorKind::InvalidArgument, "note " + std::to_string(event.note) + " not in [0, 127]");
  }
  if (event.duration_frames < 1 || static_cast<std::size_t>(event.duration_frames) >= frames) {
    throw Error(ErrorKind::TupleOverflow, "note of " + std::to_string(event.duration_frames) +
                                              " frames does not fit in " + std::to_string(frames));
  }
  const auto held = static_cast<std::size_t>(event.duration_frames);

  // Local timeline: note-on at frame 0, note-off at `held`.
  const auto configs = eg_configs(patch);
  std::array<EgState, kNumOperators> states{};
  for (std::size_t op = 0; op < kNumOperators; ++op) {
    states[op] = eg_note_on(configs[op], states[op], event.velocity);
  }
  const std::size_t horizon = frames * kTailHorizonFactor;
  std::vector<OlFrame> ol;
  ol.reserve(frames);
  std::size_t terminus = held - 1;
  bool endless = true;
  for (std::size_t k = 0; k < horizon; ++k) {
    OlFrame row{};
    for (std::size_t op = 0; op < kNumOperators; ++op) {
      if (k == held) states[op] = eg_note_off(states[op]);
      const EgOutput step = eg_step(configs[op], states[op]);
      states[op] = step.state;
      row[op] = static_cast<float>(step.level / 2.0);
    }
    if (k >= held) {
      if (!any_live(row)) {
        endless = false;
        break;
      }
      terminus = k;
    }
    // Frames past the tuple length are only needed to locate the terminus.
    if (ol.size() < frames) ol.push_back(row);
  }
  if (endless) terminus = horizon - 1;

  const std::size_t active = terminus + 1;
  TrainingTuple t;
  t.a.assign(frames, 0.0f);
  t.f.assign(frames, 0.0f);
  t.ol.assign(frames, OlFrame{});

  // At least one trailing zero frame marks an untruncated terminus.
  std::size_t lead = 0;
  if (active + 1 <= frames) {
    std::mt19937_64 rng(padding_seed);
    lead = std::uniform_int_distribution<std::size_t>(0, frames - 1 - active)(rng);
  } else {
    t.truncated = true;
  }

  const double level = event.velocity / 127.0;
  const double pitch = event.note / 127.0;
  const double ramp = static_cast<double>(terminus + 1 - held);  // frames in the ramp
  for (std::size_t k = 0; k < active && lead + k < frames; ++k) {
    const std::size_t dst = lead + k;
    double a = level;
    if (k >= held) a = level * static_cast<double>(terminus + 1 - k) / (ramp + 1.0);
    t.a[dst] = static_cast<float>(a);
    t.f[dst] = static_cast<float>(pitch);
    t.ol[dst] = ol[k];
  }
  return t;
}

Dataset build_dataset(const Dx7Patch& patch, std::size_t n, std::size_t frames,
                      std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "dataset needs at least one note");
  Dataset ds;
  ds.meta.patch_name = fixed_name(patch.name);
  ds.meta.frame_rate = kFrameRate;
  ds.meta.frames = static_cast<std::uint32_t>(frames);
  ds.meta.seed = seed;
  ds.meta.version = kDatasetVersion;

  const auto events = gen_notes(n, seed);
  std::mt19937_64 padding(seed ^ 0x9E3779B97F4A7C15ull);
  ds.tuples.reserve(n);
  for (const auto& e : events) ds.tuples.push_back(render_tuple(patch, e, frames, padding()));
  return ds;
}

std::array<std::vector<std::size_t>, 3> split_indices(std::size_t m, std::uint64_t seed) {
  if (m < 10) {
    throw Error(ErrorKind::DatasetTooSmall, "need at least 10 tuples to split, got " + std::to_string(m));
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const std::size_t n_train = (m * 8) / 10;
  const std::size_t n_valid = m / 10;
  std::array<std::vector<std::size_t>, 3> parts;
  parts[0].assign(order.begin(), order.begin() + n_train);
  parts[1].assign(order.begin() + n_train, order.begin() + n_train + n_valid);
  parts[2].assign(order.begin() + n_train + n_valid, order.end());
  return parts;
}

DatasetSplit split_dataset(const Dataset& ds, std::uint64_t seed) {
  const auto parts = split_indices(ds.size(), seed);
  return {subset(ds, parts[0]), subset(ds, parts[1]), subset(ds, parts[2])};
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  const std::size_t k = ds.meta.frames;
  detail::ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put<std::uint16_t>(ds.meta.version);
  w.put<double>(ds.meta.frame_rate);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(k));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.tuples.size()));
  w.put_bytes(fixed_name(ds.meta.patch_name));
  w.put<std::uint64_t>(ds.meta.seed);
  for (const auto& t : ds.tuples) {
    if (t.a.size() != k || t.f.size() != k || t.ol.size() != k) {
      throw Error(ErrorKind::ShapeMismatch, "tuple length differs from dataset K=" + std::to_string(k));
    }
    w.put_floats(t.a);
    w.put_floats(t.f);
    if (k > 0) w.put_floats(std::span<const float>(t.ol.front().data(), k * kNumOperators));
  }
  detail::write_file(path, w.bytes());
}

Dataset load_dataset(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() < 4 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != kMagic) {
    throw Error(ErrorKind::BadMagic, path.string() + " is not a dataset file");
  }
  detail::ByteReader r(bytes);
  r.get_string(4);
  Dataset ds;
  ds.meta.version = r.get<std::uint16_t>();
  if (ds.meta.version != kDatasetVersion) {
    throw Error(ErrorKind::VersionMismatch, "dataset version " + std::to_string(ds.meta.version) +
                                                ", expected " + std::to_string(kDatasetVersion));
  }
  ds.meta.frame_rate = r.get<double>();
  ds.meta.frames = r.get<std::uint32_t>();
  const std::uint32_t m = r.get<std::uint32_t>();
  ds.meta.patch_name = r.get_string(kNameBytes);
  ds.meta.seed = r.get<std::uint64_t>();

  const std::size_t k = ds.meta.frames;
  const std::size_t record_bytes = k * (2 + kNumOperators) * sizeof(float);
  if (r.remaining() != static_cast<std::size_t>(m) * record_bytes) {
    throw Error(ErrorKind::IoError, path.string() + ": payload is " + std::to_string(r.remaining()) +
                                        " bytes, header implies " + std::to_string(m * record_bytes));
  }
  ds.tuples.resize(m);
  for (auto& t : ds.tuples) {
    t.a.resize(k);
    t.f.resize(k);
    t.ol.resize(k);
    r.get_floats(t.a);
    r.get_floats(t.f);
    if (k > 0) r.get_floats(std::span<float>(t.ol.front().data(), k * kNumOperators));
    t.truncated = k > 0 && t.a.back() > 0.0f;
  }
  return ds;
}

double mean_occupancy(const Dataset& ds) {
  if (ds.tuples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : ds.tuples) {
    const auto live = std::count_if(t.f.begin(), t.f.end(), [](float v) { return v > 0.0f; });
    total += static_cast<double>(live) / static_cast<double>(t.frames());
  }
  return total / static_cast<double>(ds.tuples.size());
}

}  // namespace fmtt
