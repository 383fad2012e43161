#pragma once

#include <cstddef>

namespace fmtt {

inline constexpr int kSampleRate = 44100;
inline constexpr int kHop = 64;
/// Control rate of the whole pipeline, 44100 / 64 ≈ 689.06 frames per second.
inline constexpr double kFrameRate = static_cast<double>(kSampleRate) / kHop;

inline constexpr std::size_t kNumOperators = 6;

}  // namespace fmtt
