#include "fmtt/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string_view>

#include "binary_io.hpp"
#include "fmtt/error.hpp"

namespace fmtt {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct FormatChunk {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const auto fail = [&](const std::string& why) { return Error(ErrorKind::IoError, path.string() + ": " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  detail::ByteReader r(bytes);
  r.get_string(12);
  FormatChunk fmt;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  while (r.remaining() >= 8) {
    const std::string id = r.get_string(4);
    const auto size = r.get<std::uint32_t>();
    if (size > r.remaining()) throw fail("chunk '" + id + "' runs past end of file");
    const std::size_t start = r.offset();
    if (id == "fmt ") {
      if (size < 16) throw fail("short fmt chunk");
      fmt.tag = r.get<std::uint16_t>();
      fmt.channels = r.get<std::uint16_t>();
      fmt.sample_rate = r.get<std::uint32_t>();
      r.get<std::uint32_t>();  // byte rate
      r.get<std::uint16_t>();  // block align
      fmt.bits = r.get<std::uint16_t>();
      if (fmt.tag == kFormatExtensible && size >= 40) {
        r.get<std::uint16_t>();  // cbSize
        r.get<std::uint16_t>();  // valid bits
        r.get<std::uint32_t>();  // channel mask
        fmt.tag = r.get<std::uint16_t>();  // leading bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data = std::span<const std::uint8_t>(bytes).subspan(start, size);
    }
    // Chunks are word aligned.
    const std::size_t next = start + size + (size & 1u);
    if (next > bytes.size()) break;
    r.seek(next);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (data.data() == nullptr) throw fail("missing data chunk");

  const bool pcm16 = fmt.tag == kFormatPcm && fmt.bits == 16;
  const bool float32 = fmt.tag == kFormatFloat && fmt.bits == 32;
  if (!(pcm16 || float32) || fmt.channels < 1 || fmt.channels > 2) {
    throw Error(ErrorKind::UnsupportedEncoding,
                path.string() + ": format " + std::to_string(fmt.tag) + ", " + std::to_string(fmt.bits) +
                    " bits, " + std::to_string(fmt.channels) + " channels");
  }
  if (fmt.sample_rate == 0) throw fail("zero sample rate");

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frames = data.size() / (bytes_per_sample * fmt.channels);
  AudioBuffer out;
  out.sample_rate = static_cast<int>(fmt.sample_rate);
  out.samples.resize(frames);
  const auto sample_at = [&](std::size_t i) -> float {
    const std::uint8_t* p = data.data() + i * bytes_per_sample;
    if (pcm16) {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<float>(v) / 32768.0f;
    }
    float v;
    std::memcpy(&v, p, 4);
    return v;
  };
  for (std::size_t f = 0; f < frames; ++f) {
    if (fmt.channels == 1) {
      out.samples[f] = sample_at(f);
    } else {
      out.samples[f] = 0.5f * (sample_at(2 * f) + sample_at(2 * f + 1));
    }
  }
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path, WavEncoding encoding) {
  if (buffer.sample_rate <= 0) throw Error(ErrorKind::InvalidArgument, "sample rate must be positive");
  const bool pcm16 = encoding == WavEncoding::Pcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * block);

  detail::ByteWriter w;
  w.put_bytes("RIFF");
  w.put<std::uint32_t>(36 + data_bytes);
  w.put_bytes("WAVE");
  w.put_bytes("fmt ");
  w.put<std::uint32_t>(16);
  w.put<std::uint16_t>(pcm16 ? kFormatPcm : kFormatFloat);
  w.put<std::uint16_t>(1);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(buffer.sample_rate));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(buffer.sample_rate) * block);
  w.put<std::uint16_t>(block);
  w.put<std::uint16_t>(bits);
  w.put_bytes("data");
  w.put<std::uint32_t>(data_bytes);
  if (pcm16) {
    for (float s : buffer.samples) {
      const double scaled = std::round(std::clamp(static_cast<double>(s), -1.0, 1.0) * 32768.0);
      w.put<std::int16_t>(static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    }
  } else {
    w.put_floats(buffer.samples);
  }
  detail::write_file(path, w.bytes());
}

}  // namespace fmtt
