#include "fmtt/patch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "fmtt/error.hpp"

namespace fmtt {

namespace {

constexpr std::array<std::uint8_t, 6> kHeader{0xF0, 0x43, 0x00, 0x09, 0x20, 0x00};
constexpr std::size_t kPackedOperatorBytes = 17;

int clamp_byte(std::uint8_t value, int max) { return std::min<int>(value, max); }

int bits(std::uint8_t value, int shift, int width, int max) {
  const int raw = (value >> shift) & ((1 << width) - 1);
  return std::min(raw, max);
}

std::string hex_byte(std::uint8_t b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%02X", b);
  return buf;
}

OperatorParams unpack_operator(const std::uint8_t* p) {
  OperatorParams op;
  for (int i = 0; i < 4; ++i) {
    op.eg_rates[i] = clamp_byte(p[i], 99);
    op.eg_levels[i] = clamp_byte(p[4 + i], 99);
  }
  op.level_scale_break_point = clamp_byte(p[8], 99);
  op.level_scale_left_depth = clamp_byte(p[9], 99);
  op.level_scale_right_depth = clamp_byte(p[10], 99);
  op.level_scale_left_curve = bits(p[11], 0, 2, 3);
  op.level_scale_right_curve = bits(p[11], 2, 2, 3);
  op.rate_scaling = bits(p[12], 0, 3, 7);
  op.detune = bits(p[12], 3, 4, 14);
  op.amp_mod_sensitivity = bits(p[13], 0, 2, 3);
  op.velocity_sensitivity = bits(p[13], 2, 3, 7);
  op.output_level = clamp_byte(p[14], 99);
  op.freq_mode = (p[15] & 0x01) ? FreqMode::Fixed : FreqMode::Ratio;
  op.freq_coarse = bits(p[15], 1, 5, 31);
  op.freq_fine = clamp_byte(p[16], 99);
  return op;
}

void pack_operator(const OperatorParams& op, std::uint8_t* p) {
  const auto byte = [](int v, int max) { return static_cast<std::uint8_t>(std::clamp(v, 0, max)); };
  for (int i = 0; i < 4; ++i) {
    p[i] = byte(op.eg_rates[i], 99);
    p[4 + i] = byte(op.eg_levels[i], 99);
  }
  p[8] = byte(op.level_scale_break_point, 99);
  p[9] = byte(op.level_scale_left_depth, 99);
  p[10] = byte(op.level_scale_right_depth, 99);
  p[11] = static_cast<std::uint8_t>(byte(op.level_scale_left_curve, 3) | byte(op.level_scale_right_curve, 3) << 2);
  p[12] = static_cast<std::uint8_t>(byte(op.rate_scaling, 7) | byte(op.detune, 14) << 3);
  p[13] = static_cast<std::uint8_t>(byte(op.amp_mod_sensitivity, 3) | byte(op.velocity_sensitivity, 7) << 2);
  p[14] = byte(op.output_level, 99);
  p[15] = static_cast<std::uint8_t>((op.freq_mode == FreqMode::Fixed ? 1 : 0) | byte(op.freq_coarse, 31) << 1);
  p[16] = byte(op.freq_fine, 99);
}

}  // namespace

std::uint8_t bank_checksum(std::span<const std::uint8_t> payload) noexcept {
  unsigned sum = 0;
  for (auto b : payload) sum += b;
  return static_cast<std::uint8_t>((0u - sum) & 0x7F);
}

Dx7Bank parse_sysex_bank(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBankSysexBytes) {
    throw Error(ErrorKind::WrongLength, "bank is " + std::to_string(bytes.size()) +
                                            " bytes, expected " + std::to_string(kBankSysexBytes));
  }
  for (std::size_t i = 0; i < kHeader.size(); ++i) {
    // Byte 2 carries the MIDI channel in its low nibble.
    const std::uint8_t got = (i == 2) ? (bytes[i] & 0xF0) : bytes[i];
    if (got != kHeader[i]) {
      throw Error(ErrorKind::BadHeader, "header byte at offset " + std::to_string(i) + " is " +
                                            hex_byte(bytes[i]) + ", expected " +
                                            hex_byte(kHeader[i]));
    }
  }
  const std::size_t end_offset = kBankSysexBytes - 1;
  if (bytes[end_offset] != 0xF7) {
    throw Error(ErrorKind::BadHeader, "end-of-exclusive at offset " + std::to_string(end_offset) +
                                          " is " + hex_byte(bytes[end_offset]) + ", expected 0xF7");
  }

  const auto payload = bytes.subspan(kBankHeaderBytes, kBankPayloadBytes);
  const std::size_t checksum_offset = kBankHeaderBytes + kBankPayloadBytes;
  const std::uint8_t stored = bytes[checksum_offset];
  const std::uint8_t computed = bank_checksum(payload);
  if (stored != computed) {
    throw Error(ErrorKind::ChecksumMismatch, "checksum at offset " +
                                                 std::to_string(checksum_offset) + " is " +
                                                 hex_byte(stored) + ", payload sums to " +
                                                 hex_byte(computed));
  }

  Dx7Bank bank;
  bank.source_checksum = stored;
  for (std::size_t v = 0; v < kBankVoices; ++v) {
    std::copy_n(payload.begin() + v * kPackedVoiceBytes, kPackedVoiceBytes,
                bank.voices[v].begin());
  }
  return bank;
}

Dx7Bank read_sysex_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_sysex_bank(bytes);
}

Dx7Patch unpack_voice(const Dx7Bank& bank, int index) {
  if (index < 0 || index >= static_cast<int>(kBankVoices)) {
    throw Error(ErrorKind::IndexOutOfRange,
                "voice index " + std::to_string(index) + " not in [0, 31]");
  }
  return unpack_voice(bank.voices[static_cast<std::size_t>(index)]);
}

Dx7Patch unpack_voice(const PackedVoice& v) {
  Dx7Patch patch;
  for (std::size_t slot = 0; slot < kNumOperators; ++slot) {
    // slot 0 holds OP6
    patch.operators[kNumOperators - 1 - slot] = unpack_operator(v.data() + slot * kPackedOperatorBytes);
  }
  for (int i = 0; i < 4; ++i) {
    patch.pitch_eg_rates[i] = clamp_byte(v[102 + i], 99);
    patch.pitch_eg_levels[i] = clamp_byte(v[106 + i], 99);
  }
  patch.algorithm = clamp_byte(v[110], 31) + 1;
  patch.feedback = bits(v[111], 0, 3, 7);
  patch.osc_key_sync = (v[111] >> 3) & 1;
  patch.lfo_speed = clamp_byte(v[112], 99);
  patch.lfo_delay = clamp_byte(v[113], 99);
  patch.lfo_pitch_mod_depth = clamp_byte(v[114], 99);
  patch.lfo_amp_mod_depth = clamp_byte(v[115], 99);
  patch.lfo_key_sync = v[116] & 1;
  patch.lfo_wave = bits(v[116], 1, 3, 5);
  patch.pitch_mod_sensitivity = bits(v[116], 4, 3, 7);
  patch.transpose = clamp_byte(v[117], 48);
  patch.name.resize(10);
  for (int i = 0; i < 10; ++i) {
    const char c = static_cast<char>(v[118 + i] & 0x7F);
    patch.name[i] = (c < 0x20 || c == 0x7F) ? ' ' : c;
  }
  return patch;
}

PackedVoice pack_voice(const Dx7Patch& patch) {
  const auto byte = [](int v, int max) { return static_cast<std::uint8_t>(std::clamp(v, 0, max)); };
  PackedVoice v{};
  for (std::size_t slot = 0; slot < kNumOperators; ++slot) {
    pack_operator(patch.operators[kNumOperators - 1 - slot], v.data() + slot * kPackedOperatorBytes);
  }
  for (int i = 0; i < 4; ++i) {
    v[102 + i] = byte(patch.pitch_eg_rates[i], 99);
    v[106 + i] = byte(patch.pitch_eg_levels[i], 99);
  }
  v[110] = byte(patch.algorithm - 1, 31);
  v[111] = static_cast<std::uint8_t>(byte(patch.feedback, 7) | (patch.osc_key_sync ? 8 : 0));
  v[112] = byte(patch.lfo_speed, 99);
  v[113] = byte(patch.lfo_delay, 99);
  v[114] = byte(patch.lfo_pitch_mod_depth, 99);
  v[115] = byte(patch.lfo_amp_mod_depth, 99);
  v[116] = static_cast<std::uint8_t>((patch.lfo_key_sync ? 1 : 0) | byte(patch.lfo_wave, 5) << 1 |
                                     byte(patch.pitch_mod_sensitivity, 7) << 4);
  v[117] = byte(patch.transpose, 48);
  for (std::size_t i = 0; i < 10; ++i) {
    v[118 + i] = i < patch.name.size() ? static_cast<std::uint8_t>(patch.name[i] & 0x7F) : ' ';
  }
  return v;
}

std::vector<std::uint8_t> build_sysex_bank(const std::array<PackedVoice, kBankVoices>& voices) {
  std::vector<std::uint8_t> out(kHeader.begin(), kHeader.end());
  out.reserve(kBankSysexBytes);
  for (const auto& v : voices) out.insert(out.end(), v.begin(), v.end());
  out.push_back(bank_checksum(std::span(out).subspan(kBankHeaderBytes)));
  out.push_back(0xF7);
  return out;
}

double op_frequency(const OperatorParams& op, double f0) noexcept {
  if (op.freq_mode == FreqMode::Fixed) {
    return std::pow(10.0, op.freq_coarse % 4) * std::pow(10.0, op.freq_fine / 100.0);
  }
  const double coarse = op.freq_coarse == 0 ? 0.5 : static_cast<double>(op.freq_coarse);
  const double cents = (op.detune - 7) * kDetuneCentsPerStep;
  return f0 * coarse * (1.0 + op.freq_fine / 100.0) * std::exp2(cents / 1200.0);
}

std::string patch_summary(const Dx7Patch& patch) {
  std::ostringstream out;
  out << "name:      \"" << patch.name << "\"\n"
      << "algorithm: " << patch.algorithm << "\n"
      << "feedback:  " << patch.feedback << "\n"
      << "op  mode   coarse fine detune  out vel  rates           levels\n";
  for (int i = 0; i < static_cast<int>(kNumOperators); ++i) {
    const auto& op = patch.operators[i];
    char line[160];
    std::snprintf(line, sizeof line, "%-3d %-6s %6d %4d %+6d %4d %3d  %2d %2d %2d %2d     %2d %2d %2d %2d\n",
                  i + 1, op.freq_mode == FreqMode::Ratio ? "ratio" : "fixed", op.freq_coarse,
                  op.freq_fine, op.detune - 7, op.output_level, op.velocity_sensitivity,
                  op.eg_rates[0], op.eg_rates[1], op.eg_rates[2], op.eg_rates[3],
                  op.eg_levels[0], op.eg_levels[1], op.eg_levels[2], op.eg_levels[3]);
    out << line;
  }
  return out.str();
}

}  // namespace fmtt
