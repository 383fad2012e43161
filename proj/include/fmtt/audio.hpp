#pragma once

#include <filesystem>
#include <vector>

#include "fmtt/constants.hpp"

namespace fmtt {

struct AudioBuffer {
  int sample_rate = kSampleRate;
  std::vector<float> samples;  // mono, nominally [-1, 1]
};

enum class WavEncoding { Pcm16, Float32 };

/// PCM16 or IEEE float32 RIFF/WAVE, mono or stereo. Stereo is averaged to mono.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Mono output. PCM16 clamps to [-1, 1], scales by 32768 and saturates at 32767.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace fmtt
