#include <functional>
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "fixture_bank.hpp"
#include "fmtt/dataset.hpp"
#include "fmtt/error.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace fmtt;

namespace {

Dx7Patch silent_patch() {
  Dx7Patch p = testing::epiano_patch();
  for (auto& op : p.operators) op.eg_levels = {0, 0, 0, 0};
  return p;
}

Dx7Patch endless_release_patch() {
  Dx7Patch p = testing::epiano_patch();
  for (auto& op : p.operators) op.eg_rates[3] = 5;
  return p;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an fmtt::Error");
  return ErrorKind::InvalidArgument;
}

std::size_t first_positive(const std::vector<float>& v) {
  return static_cast<std::size_t>(std::find_if(v.begin(), v.end(), [](float x) { return x > 0; }) - v.begin());
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("gen_notes ranges and determinism") {
  const auto notes = gen_notes(1000, 42);
  REQUIRE(notes.size() == 1000);
  for (const auto& e : notes) {
    CHECK((e.velocity >= 1 && e.velocity <= 127));
    CHECK((e.note >= 0 && e.note <= 127));
    CHECK((e.duration_frames >= 600 && e.duration_frames <= 732));
  }
  CHECK(gen_notes(1, 9) == gen_notes(1, 9));
  CHECK(gen_notes(5, 9) != gen_notes(5, 10));
}

TEST_CASE("mean note duration converges to 666 frames") {
  const auto notes = gen_notes(100000, 1);
  double sum = 0.0;
  for (const auto& e : notes) sum += e.duration_frames;
  CHECK(sum / 1e5 == doctest::Approx(666.0).epsilon(2.0 / 666.0));
}

TEST_CASE("sustained values follow velocity and note") {
  const auto p = testing::epiano_patch();
  const auto t = render_tuple(p, {127, 60, 650}, 1000, 3);
  const std::size_t on = first_positive(t.a);
  CHECK(t.a[on + 100] == doctest::Approx(1.0));
  CHECK(t.f[on + 100] == doctest::Approx(60.0 / 127.0));
  CHECK(t.f[on + 100] == doctest::Approx(0.47244).epsilon(1e-5));

  const auto quiet = render_tuple(p, {1, 60, 650}, 1000, 3);
  CHECK(quiet.a[first_positive(quiet.a) + 10] == doctest::Approx(1.0 / 127.0));
}

TEST_CASE("held span is exactly the note duration") {
  const auto t = render_tuple(testing::epiano_patch(), {90, 64, 640}, 1000, 8);
  const std::size_t on = first_positive(t.a);
  for (std::size_t k = on; k < on + 640; ++k) CHECK(t.a[k] == doctest::Approx(90.0 / 127.0));
  CHECK(t.a[on + 640] < t.a[on + 639]);
}

TEST_CASE("silent patch gives a zero-length ramp") {
  const auto t = render_tuple(silent_patch(), {100, 50, 620}, 1000, 1);
  for (const auto& row : t.ol) {
    for (float v : row) CHECK(v == 0.0f);
  }
  const std::size_t on = first_positive(t.a);
  std::size_t last = 0;
  for (std::size_t k = 0; k < t.f.size(); ++k) {
    if (t.f[k] > 0) last = k;
  }
  CHECK(last == on + 619);
  CHECK(t.a[on + 620] == 0.0f);
}

TEST_CASE("overflow and truncation") {
  const auto p = testing::epiano_patch();
  CHECK(kind_of([&] { render_tuple(p, {100, 60, 1000}, 1000, 0); }) == ErrorKind::TupleOverflow);
  CHECK(kind_of([&] { render_tuple(p, {0, 60, 600}, 1000, 0); }) == ErrorKind::VelocityOutOfRange);

  const auto t = render_tuple(endless_release_patch(), {100, 60, 700}, 1000, 0);
  CHECK(t.truncated);
  CHECK(first_positive(t.a) == 0);
  CHECK(t.a.back() > 0.0f);
  CHECK(testing::alignment_violation(t).empty());
}

TEST_CASE("alignment invariants hold for random notes") {
  const auto p = testing::epiano_patch();
  const auto notes = gen_notes(300, 77);
  std::mt19937_64 rng(5);
  for (const auto& e : notes) {
    const auto t = render_tuple(p, e, 1000, rng());
    const auto why = testing::alignment_violation(t);
    INFO("velocity ", e.velocity, " note ", e.note, " duration ", e.duration_frames);
    CHECK(why == "");
    CHECK_FALSE(t.truncated);
  }
}

TEST_CASE("dataset determinism and occupancy") {
  const auto p = testing::epiano_patch();
  CHECK(build_dataset(p, 10, 1000, 4) == build_dataset(p, 10, 1000, 4));
  CHECK_FALSE(build_dataset(p, 10, 1000, 4) == build_dataset(p, 10, 1000, 5));
  CHECK(kind_of([&] { build_dataset(p, 0, 1000, 4); }) == ErrorKind::EmptyDataset);

  const Dataset ds = build_dataset(p, 1000, 1000, 2024);
  CHECK(ds.meta.patch_name == "E.PIANO 1 ");
  CHECK(ds.meta.frames == 1000);
  CHECK(mean_occupancy(ds) == doctest::Approx(0.67).epsilon(0.05 / 0.67));
}

TEST_CASE("split sizes and partition") {
  const auto sizes = [](std::size_t m) {
    const auto parts = split_indices(m, 1);
    return std::array<std::size_t, 3>{parts[0].size(), parts[1].size(), parts[2].size()};
  };
  CHECK(sizes(1000) == std::array<std::size_t, 3>{800, 100, 100});
  CHECK(sizes(10) == std::array<std::size_t, 3>{8, 1, 1});
  CHECK(sizes(17) == std::array<std::size_t, 3>{13, 1, 3});
  CHECK(kind_of([] { split_indices(9, 1); }) == ErrorKind::DatasetTooSmall);

  for (std::size_t m : {10u, 57u, 1000u}) {
    const auto parts = split_indices(m, 3);
    std::set<std::size_t> all;
    std::size_t total = 0;
    for (const auto& part : parts) {
      all.insert(part.begin(), part.end());
      total += part.size();
    }
    CHECK(total == m);
    CHECK(all.size() == m);
    CHECK(*all.rbegin() == m - 1);
  }
}

TEST_CASE("save and load round trip") {
  testing::TempDir dir;
  Dataset ds = build_dataset(testing::epiano_patch(), 12, 800, 6);
  ds.tuples.push_back(render_tuple(endless_release_patch(), {100, 60, 700}, 800, 0));
  const auto path = dir / "ds.fmtd";
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  CHECK(back == ds);
  CHECK(back.tuples.back().truncated);

  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  const auto write = [&](const std::vector<char>& b) {
    const auto p = dir / "broken.fmtd";
    std::ofstream(p, std::ios::binary).write(b.data(), static_cast<std::streamsize>(b.size()));
    return p;
  };

  auto cut = bytes;
  cut.resize(cut.size() - 5);
  CHECK(kind_of([&] { load_dataset(write(cut)); }) == ErrorKind::IoError);
  auto header_only = bytes;
  header_only.resize(20);
  CHECK(kind_of([&] { load_dataset(write(header_only)); }) == ErrorKind::IoError);
  auto tiny = bytes;
  tiny.resize(2);
  CHECK(kind_of([&] { load_dataset(write(tiny)); }) == ErrorKind::BadMagic);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK(kind_of([&] { load_dataset(write(magic)); }) == ErrorKind::BadMagic);
  auto version = bytes;
  version[4] = 9;
  CHECK(kind_of([&] { load_dataset(write(version)); }) == ErrorKind::VersionMismatch);
  CHECK(kind_of([&] { load_dataset(dir / "missing.fmtd"); }) == ErrorKind::IoError);
}

TEST_CASE("split keeps metadata") {
  const Dataset ds = build_dataset(testing::epiano_patch(), 20, 900, 6);
  const auto split = split_dataset(ds, 6);
  CHECK(split.train.meta == ds.meta);
  CHECK(split.test.meta == ds.meta);
  CHECK(split.train.size() + split.valid.size() + split.test.size() == 20);
}

}  // TEST_SUITE
