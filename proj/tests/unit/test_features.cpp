#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fmtt/error.hpp"
#include "fmtt/features.hpp"

using namespace fmtt;

namespace {

std::vector<float> sine(double freq, double amplitude, std::size_t n, double phase = 0.0) {
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(amplitude * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / 44100.0 + phase));
  }
  return out;
}

double cents(double got, double want) { return 1200.0 * std::log2(got / want); }

}  // namespace

TEST_SUITE("features") {

TEST_CASE("rms normalisation") {
  CHECK(rms_norm(std::vector<float>(1024, 0.0f)) == 0.0);
  // Ten whole periods in the window make the mean square exactly A^2 / 2.
  const double f = 44100.0 * 10.0 / 1024.0;
  CHECK(rms_norm(sine(f, 1.0, 1024)) == doctest::Approx(1.0 + 10.0 * std::log10(0.5) / 70.0).epsilon(1e-6));
  CHECK(rms_norm(sine(f, 1.0, 1024)) == doctest::Approx(0.95700).epsilon(1e-5));
  CHECK(rms_norm(sine(f, 0.1, 1024)) == doctest::Approx(0.67128).epsilon(1e-5));
  CHECK(rms_norm(std::vector<float>(1024, 1e-5f)) == 0.0);

  std::mt19937 rng(1);
  std::normal_distribution<float> noise(0.0f, 0.3f);
  std::vector<float> w(1024);
  for (auto& s : w) s = noise(rng);
  double prev = 0.0;
  for (float gain : {0.0001f, 0.001f, 0.01f, 0.1f, 0.5f, 1.0f, 3.0f}) {
    std::vector<float> scaled(w);
    for (auto& s : scaled) s *= gain;
    const double a = rms_norm(scaled);
    CHECK(a >= prev);
    CHECK((a >= 0.0 && a <= 1.0));
    prev = a;
  }
}

TEST_CASE("pitch normalisation") {
  CHECK(f_norm(220.0) == doctest::Approx(0.44890).epsilon(1e-5));
  CHECK(f_norm(440.0) == doctest::Approx(0.54339).epsilon(1e-5));
  CHECK(f_norm(0.0) == 0.0);
  CHECK(f_norm(1e6) == 1.0);
  for (int note = 33; note <= 108; ++note) {
    CHECK(std::abs(f_norm(note_to_hz(note)) - note / 127.0) < 1e-3);
  }
  CHECK(note_to_hz(69.0) == doctest::Approx(440.0));
}

TEST_CASE("yin on pure and harmonic tones") {
  for (double f = 110.0; f <= 880.0; f *= std::exp2(1.0 / 12.0)) {
    const double got = yin_f0(sine(f, 0.8, 1024, 0.3));
    CHECK(std::abs(cents(got, f)) < 1.0);

    // Strong upper partials must not pull the estimate up an octave, and
    // the fundamental must not be confused with its sub-octave.
    std::vector<float> tone(1024, 0.0f);
    for (int h = 1; h <= 4; ++h) {
      const auto partial = sine(f * h, 0.5 / h, 1024, 0.7 * h);
      for (std::size_t i = 0; i < tone.size(); ++i) tone[i] += partial[i];
    }
    CHECK(std::abs(cents(yin_f0(tone), f)) < 20.0);
  }
  CHECK(std::abs(cents(yin_f0(sine(440.0, 0.5, 1024)), 440.0)) < 1.0);
}

TEST_CASE("yin reports low tones and noise as unvoiced") {
  CHECK(yin_f0(sine(80.0, 0.8, 1024)) == 0.0);
  CHECK(yin_f0(std::vector<float>(1024, 0.0f)) == 0.0);
  CHECK_THROWS_AS(yin_f0(std::vector<float>(512, 0.0f)), Error);

  std::mt19937 rng(7);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  int voiced = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<float> w(1024);
    for (auto& s : w) s = u(rng);
    if (yin_f0(w) > 0.0) ++voiced;
  }
  CHECK(voiced <= trials * 5 / 100);
}

TEST_CASE("offline framing") {
  AudioBuffer second{44100, std::vector<float>(44100, 0.0f)};
  const auto silent = analyze(second);
  CHECK(silent.size() == 689);
  for (const auto& fr : silent) {
    CHECK(fr.a == 0.0);
    CHECK(fr.f == 0.0);
    CHECK(fr.f0 == 0.0);
  }

  AudioBuffer tone{44100, sine(440.0, 1.0, 44100)};
  const auto frames = analyze(tone);
  for (std::size_t k = 20; k < frames.size(); k += 50) {
    CHECK(frames[k].a == doctest::Approx(0.957).epsilon(1e-3));
    CHECK(frames[k].f == doctest::Approx(0.5434).epsilon(1e-3));
    CHECK((frames[k].f > 0.0) == (frames[k].f0 > 0.0));
  }

  AudioBuffer other{48000, std::vector<float>(48000, 0.0f)};
  CHECK_THROWS_AS(analyze(other), Error);
  CHECK(analyze(AudioBuffer{44100, std::vector<float>(63, 0.0f)}).empty());
  CHECK(analyze(AudioBuffer{44100, std::vector<float>(1000, 0.0f)}).size() == 15);
}

TEST_CASE("streaming frames match offline frames") {
  std::vector<float> audio = sine(262.0, 0.5, 64 * 200);
  for (std::size_t i = 0; i < audio.size(); ++i) audio[i] *= static_cast<float>(i) / static_cast<float>(audio.size());
  const auto offline = analyze(AudioBuffer{44100, audio});
  REQUIRE(offline.size() == 200);
  // From frame 15 on the window holds only real samples.
  CHECK(offline[15].a == rms_norm(std::span(audio).first(1024)));
  FeatureStream stream;
  for (std::size_t j = 0; j < 200; ++j) {
    const auto fr = stream.push(std::span(audio).subspan(j * 64, 64));
    CHECK(fr.a == offline[j].a);
    CHECK(fr.f == offline[j].f);
    CHECK(fr.f0 == offline[j].f0);
  }
  CHECK_THROWS_AS(stream.push(std::vector<float>(32, 0.0f)), Error);
  stream.reset();
  const auto first = stream.push(std::span(audio).subspan(0, 64));
  FeatureStream fresh;
  CHECK(first.a == fresh.push(std::span(audio).subspan(0, 64)).a);
}

}  // TEST_SUITE
