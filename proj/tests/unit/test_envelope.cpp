#include <doctest.h>

#include <cmath>
#include <random>

#include "fixture_bank.hpp"
#include "fmtt/envelope.hpp"
#include "fmtt/error.hpp"

using namespace fmtt;

namespace {

EgConfig random_config(std::mt19937& rng, bool release_to_zero) {
  auto u = [&](int hi) { return std::uniform_int_distribution<int>(0, hi)(rng); };
  EgConfig c;
  for (auto& r : c.rates) r = 20 + u(79);
  for (auto& l : c.levels) l = u(99);
  if (release_to_zero) c.levels[3] = 0;
  c.output_level = u(99);
  c.velocity_sensitivity = u(7);
  return c;
}

std::vector<double> run(const EgConfig& c, int velocity, int held, int total) {
  EgState s = eg_note_on(c, EgState{}, velocity);
  std::vector<double> out;
  for (int k = 0; k < total; ++k) {
    if (k == held) s = eg_note_off(s);
    const auto step = eg_step(c, s);
    s = step.state;
    CHECK((s.u >= 0.0 && s.u <= 1.0));
    out.push_back(step.level);
  }
  return out;
}

}  // namespace

TEST_SUITE("envelope") {

TEST_CASE("velocity gain") {
  CHECK(velocity_gain(127, 5) == doctest::Approx(1.0));
  CHECK(velocity_gain(64, 7) == doctest::Approx(64.0 / 127.0));
  CHECK(velocity_gain(64, 0) == doctest::Approx(1.0));

  EgConfig c;
  c.velocity_sensitivity = 7;
  CHECK(eg_note_on(c, EgState{}, 64).velocity_gain == doctest::Approx(0.5039).epsilon(1e-4));
  CHECK_THROWS_AS(eg_note_on(c, EgState{}, 0), Error);
  CHECK_THROWS_AS(eg_note_on(c, EgState{}, 128), Error);
}

TEST_CASE("time constant halves every eight rate steps") {
  CHECK(eg_time_constant(0) == doctest::Approx(8.0));
  CHECK(eg_time_constant(8) == doctest::Approx(4.0));
  CHECK(eg_time_constant(99) == doctest::Approx(8.0 * std::exp2(-99.0 / 8.0)));
}

TEST_CASE("one step follows the exponential relaxation") {
  EgConfig c;
  c.rates = {40, 40, 40, 40};
  c.levels = {99, 50, 50, 0};
  const EgState s = eg_note_on(c, EgState{}, 127);
  const auto step = eg_step(c, s);
  const double tau = 8.0 * std::pow(2.0, -40.0 / 8.0);
  const double expected = 1.0 - std::exp(-(64.0 / 44100.0) / tau);
  CHECK(step.state.u == doctest::Approx(expected).epsilon(1e-12));
  CHECK(step.level == doctest::Approx(2.0 * expected).epsilon(1e-12));
}

TEST_CASE("segment transitions") {
  EgConfig c;
  EgState s = eg_note_on(c, EgState{}, 100);
  CHECK(s.segment == EgSegment::Attack);
  CHECK(eg_note_off(s).segment == EgSegment::Release);
  s.segment = EgSegment::Sustain;
  CHECK(eg_note_off(s).segment == EgSegment::Release);
  EgState done;
  CHECK(eg_note_off(done).segment == EgSegment::Done);
  CHECK(eg_note_off(eg_note_off(done)) == eg_note_off(done));

  // A full note visits the segments in order.
  c.rates = {90, 60, 60, 60};
  c.levels = {99, 80, 70, 0};
  s = eg_note_on(c, EgState{}, 127);
  std::vector<EgSegment> seen{s.segment};
  for (int k = 0; k < 4000; ++k) {
    if (k == 2000) s = eg_note_off(s);
    s = eg_step(c, s).state;
    if (s.segment != seen.back()) seen.push_back(s.segment);
  }
  const std::vector<EgSegment> expected{EgSegment::Attack, EgSegment::Decay1, EgSegment::Decay2,
                                        EgSegment::Sustain, EgSegment::Release, EgSegment::Done};
  CHECK(seen == expected);
}

TEST_CASE("fastest rates reach 1.9 within five frames") {
  EgConfig c;
  c.rates = {99, 99, 99, 99};
  c.levels = {99, 99, 99, 0};
  c.output_level = 99;
  const auto levels = run(c, 127, 100, 5);
  CHECK(*std::max_element(levels.begin(), levels.end()) >= 1.9);
}

TEST_CASE("zero levels give silence") {
  EgConfig c;
  c.levels = {0, 0, 0, 0};
  for (double v : run(c, 127, 50, 200)) CHECK(v == 0.0);
}

TEST_CASE("sustain plateau is constant") {
  EgConfig c;
  c.rates = {80, 70, 70, 50};
  c.levels = {99, 99, 99, 0};
  c.output_level = 90;
  EgState s = eg_note_on(c, EgState{}, 127);
  while (s.segment != EgSegment::Sustain) s = eg_step(c, s).state;
  const double plateau = eg_step(c, s).level;
  for (int k = 0; k < 100; ++k) {
    const auto step = eg_step(c, s);
    s = step.state;
    CHECK(std::abs(step.level - plateau) <= 1e-3);
  }
}

TEST_CASE("release to zero is monotone and finite") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const EgConfig c = random_config(rng, true);
    const int held = 50 + static_cast<int>(rng() % 400);
    const auto levels = run(c, 1 + static_cast<int>(rng() % 127), held, held + 20000);
    for (std::size_t k = static_cast<std::size_t>(held) + 1; k < levels.size(); ++k) {
      CHECK(levels[k] <= levels[k - 1]);
    }
    CHECK(levels.back() < 1e-3);
  }
}

TEST_CASE("levels stay within [0, 2]") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const EgConfig c = random_config(rng, trial % 2 == 0);
    const int held = 1 + static_cast<int>(rng() % 800);
    for (double v : run(c, 1 + static_cast<int>(rng() % 127), held, 1200)) {
      CHECK((v >= 0.0 && v <= 2.0));
    }
  }
}

TEST_CASE("eg_render framing") {
  const auto configs = eg_configs(testing::epiano_patch());
  CHECK_THROWS_AS(eg_render(configs, 100, 10, 10, 100), Error);
  CHECK_THROWS_AS(eg_render(configs, 100, 10, 101, 100), Error);

  const auto a = eg_render(configs, 100, 20, 600, 1000);
  const auto b = eg_render(configs, 100, 20, 600, 1000);
  REQUIRE(a.size() == 1000);
  for (std::size_t k = 0; k < 20; ++k) {
    for (double v : a[k]) CHECK(v == 0.0);
  }
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);

  std::array<EgConfig, kNumOperators> silent{};
  for (auto& c : silent) c.levels = {0, 0, 0, 0};
  for (const auto& row : eg_render(silent, 127, 0, 10, 50)) {
    for (double v : row) CHECK(v == 0.0);
  }
}

TEST_CASE("electric piano: carriers attack fast, the tine modulator fades first") {
  const auto levels = eg_render(eg_configs(testing::epiano_patch()), 127, 0, 700, 1000);
  for (int carrier : {0, 2, 4}) CHECK(levels[3][static_cast<std::size_t>(carrier)] > 1.0);
  const auto ratio = [&](std::size_t op) { return levels[400][op] / levels[5][op]; };
  CHECK(ratio(1) < ratio(0));
  // Everything has died away well before the end of the buffer.
  for (double v : levels.back()) CHECK(v == 0.0);
}

}  // TEST_SUITE
