#pragma once

// Training tuples (a, f, ol) synthesised from a DX7 patch.
//
// One tuple holds one note: a is a trapezoid (velocity/127 step, then a linear
// ramp to zero ending at the terminus), f is a step of note/127 that stays up
// until the terminus, and ol holds the six envelope levels scaled to [0,1].
// The terminus is the last frame where any ol channel is >= kOlSilence.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fmtt/constants.hpp"
#include "fmtt/patch.hpp"

namespace fmtt {

inline constexpr float kOlSilence = 5e-4f;
inline constexpr int kMinNoteFrames = 600;
inline constexpr int kMaxNoteFrames = 732;
inline constexpr std::uint16_t kDatasetVersion = 1;

struct NoteEvent {
  int velocity = 127;
  int note = 60;
  int duration_frames = kMinNoteFrames;  // note-on to note-off

  bool operator==(const NoteEvent&) const = default;
};

using OlFrame = std::array<float, kNumOperators>;

struct TrainingTuple {
  std::vector<float> a;
  std::vector<float> f;
  std::vector<OlFrame> ol;
  /// Release tail did not fit and was cut at the last frame.
  bool truncated = false;

  std::size_t frames() const noexcept { return a.size(); }
  bool operator==(const TrainingTuple&) const = default;
};

struct DatasetMeta {
  std::string patch_name;  // 10 characters on disk
  double frame_rate = kFrameRate;
  std::uint32_t frames = 0;  // K
  std::uint64_t seed = 0;
  std::uint16_t version = kDatasetVersion;

  bool operator==(const DatasetMeta&) const = default;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<TrainingTuple> tuples;

  std::size_t size() const noexcept { return tuples.size(); }
  bool operator==(const Dataset&) const = default;
};

struct DatasetSplit {
  Dataset train;
  Dataset valid;
  Dataset test;
};

/// Uniform velocities 1..127, notes 0..127, durations 600..732 frames.
std::vector<NoteEvent> gen_notes(std::size_t n, std::uint64_t seed);

/// Renders one padded tuple of `frames` frames. Throws TupleOverflow when the
/// held part of the note alone does not fit; long release tails are cut and
/// flagged instead.
TrainingTuple render_tuple(const Dx7Patch& patch, const NoteEvent& event, std::size_t frames,
                           std::uint64_t padding_seed);

Dataset build_dataset(const Dx7Patch& patch, std::size_t n, std::size_t frames,
                      std::uint64_t seed);

/// Shuffled index partition with sizes floor(0.8M), floor(0.1M), remainder.
std::array<std::vector<std::size_t>, 3> split_indices(std::size_t m, std::uint64_t seed);
DatasetSplit split_dataset(const Dataset& ds, std::uint64_t seed);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Fraction of frames with f > 0, averaged over tuples.
double mean_occupancy(const Dataset& ds);

}  // namespace fmtt
