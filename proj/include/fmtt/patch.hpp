#pragma once

// DX7 32-voice bulk dump ingestion.
//
// Bank layout (4104 bytes):
//   F0 43 0n 09 20 00 | 32 x 128 packed voice bytes | checksum | F7
// The checksum is the two's complement of the payload sum, masked to 7 bits.
// Inside a packed voice the operators are stored OP6 first; Dx7Patch keeps
// them in natural order, operators[0] is OP1.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fmtt/constants.hpp"

namespace fmtt {

inline constexpr std::size_t kBankVoices = 32;
inline constexpr std::size_t kPackedVoiceBytes = 128;
inline constexpr std::size_t kBankPayloadBytes = kBankVoices * kPackedVoiceBytes;
inline constexpr std::size_t kBankHeaderBytes = 6;
inline constexpr std::size_t kBankSysexBytes = kBankHeaderBytes + kBankPayloadBytes + 2;

using PackedVoice = std::array<std::uint8_t, kPackedVoiceBytes>;

struct Dx7Bank {
  std::array<PackedVoice, kBankVoices> voices{};
  std::uint8_t source_checksum = 0;
};

enum class FreqMode { Ratio, Fixed };

struct OperatorParams {
  std::array<int, 4> eg_rates{99, 99, 99, 99};
  std::array<int, 4> eg_levels{99, 99, 99, 0};
  FreqMode freq_mode = FreqMode::Ratio;
  int freq_coarse = 1;
  int freq_fine = 0;
  int detune = 7;  // 7 is centre
  int output_level = 0;
  int velocity_sensitivity = 0;

  // Decoded for completeness, unused by the envelope and synth models.
  int level_scale_break_point = 0;
  int level_scale_left_depth = 0;
  int level_scale_right_depth = 0;
  int level_scale_left_curve = 0;
  int level_scale_right_curve = 0;
  int rate_scaling = 0;
  int amp_mod_sensitivity = 0;

  bool operator==(const OperatorParams&) const = default;
};

struct Dx7Patch {
  std::string name;  // always 10 characters
  int algorithm = 1;
  int feedback = 0;
  std::array<OperatorParams, kNumOperators> operators{};

  // Unused downstream.
  std::array<int, 4> pitch_eg_rates{};
  std::array<int, 4> pitch_eg_levels{};
  bool osc_key_sync = false;
  int lfo_speed = 0;
  int lfo_delay = 0;
  int lfo_pitch_mod_depth = 0;
  int lfo_amp_mod_depth = 0;
  bool lfo_key_sync = false;
  int lfo_wave = 0;
  int pitch_mod_sensitivity = 0;
  int transpose = 24;

  bool operator==(const Dx7Patch&) const = default;
};

/// 7-bit two's-complement checksum over the bank payload.
std::uint8_t bank_checksum(std::span<const std::uint8_t> payload) noexcept;

Dx7Bank parse_sysex_bank(std::span<const std::uint8_t> bytes);
Dx7Bank read_sysex_file(const std::filesystem::path& path);

/// Decodes one packed voice. Out-of-range fields are clamped, never rejected.
Dx7Patch unpack_voice(const Dx7Bank& bank, int index);
Dx7Patch unpack_voice(const PackedVoice& voice);

/// Inverse of unpack_voice for in-range fields. The name is padded or cut to
/// 10 characters.
PackedVoice pack_voice(const Dx7Patch& patch);

/// Complete 4104-byte bulk dump (channel 1) with a valid checksum.
std::vector<std::uint8_t> build_sysex_bank(const std::array<PackedVoice, kBankVoices>& voices);

/// Oscillator frequency of an operator playing fundamental `f0` (Hz).
/// Ratio mode: f0 * coarse' * (1 + fine/100) detuned by (detune - 7) cents,
/// with coarse 0 meaning a ratio of 0.5. Fixed mode ignores f0:
/// 10^(coarse mod 4) * 10^(fine/100).
double op_frequency(const OperatorParams& op, double f0) noexcept;

inline constexpr double kDetuneCentsPerStep = 1.0;

/// Multi-line human-readable summary (name, algorithm, operator table).
std::string patch_summary(const Dx7Patch& patch);

}  // namespace fmtt
