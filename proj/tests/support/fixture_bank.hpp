#pragma once

// Synthetic DX7 bank used by the tests, the acceptance suite and the CLI
// checks. No factory ROM dump ships with the repository, so voice 10 is an
// electric-piano voice built from the well-known "E.PIANO 1" layout.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fmtt/patch.hpp"

namespace fmtt::testing {

inline constexpr int kEpianoVoice = 10;
inline constexpr int kSineVoice = 0;  // algorithm 32, OP1 only, no envelope decay

/// Algorithm 5, three two-operator stacks, feedback 6.
Dx7Patch epiano_patch();

/// A single sustained carrier: handy for closed-form synth checks.
Dx7Patch sine_patch();

std::vector<std::uint8_t> fixture_bank_bytes();
void write_fixture_bank(const std::filesystem::path& path);

}  // namespace fmtt::testing
