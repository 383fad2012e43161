#include "fmtt/fm_synth.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fmtt/error.hpp"

namespace fmtt {

namespace {

struct AlgorithmRow {
  const char* carriers;  // 1-based operator numbers
  const char* edges;     // "m>c": operator m modulates operator c
  int feedback_op;
  int feedback_source;
};

// Standard DX7 algorithm chart.
constexpr AlgorithmRow kAlgorithms[32] = {
    {"1 3", "2>1 4>3 5>4 6>5", 6, 6},          // 1
    {"1 3", "2>1 4>3 5>4 6>5", 2, 2},          // 2
    {"1 4", "2>1 3>2 5>4 6>5", 6, 6},          // 3
    {"1 4", "2>1 3>2 5>4 6>5", 6, 4},          // 4
    {"1 3 5", "2>1 4>3 6>5", 6, 6},            // 5
    {"1 3 5", "2>1 4>3 6>5", 6, 5},            // 6
    {"1 3", "2>1 4>3 5>3 6>5", 6, 6},          // 7
    {"1 3", "2>1 4>3 5>3 6>5", 4, 4},          // 8
    {"1 3", "2>1 4>3 5>3 6>5", 2, 2},          // 9
    {"1 4", "2>1 3>2 5>4 6>4", 3, 3},          // 10
    {"1 4", "2>1 3>2 5>4 6>4", 6, 6},          // 11
    {"1 3", "2>1 4>3 5>3 6>3", 2, 2},          // 12
    {"1 3", "2>1 4>3 5>3 6>3", 6, 6},          // 13
    {"1 3", "2>1 4>3 5>4 6>4", 6, 6},          // 14
    {"1 3", "2>1 4>3 5>4 6>4", 2, 2},          // 15
    {"1", "2>1 3>1 4>3 5>1 6>5", 6, 6},        // 16
    {"1", "2>1 3>1 4>3 5>1 6>5", 2, 2},        // 17
    {"1", "2>1 3>1 4>1 5>4 6>5", 3, 3},        // 18
    {"1 4 5", "2>1 3>2 6>4 6>5", 6, 6},        // 19
    {"1 2 4", "3>1 3>2 5>4 6>4", 3, 3},        // 20
    {"1 2 4 5", "3>1 3>2 6>4 6>5", 3, 3},      // 21
    {"1 3 4 5", "2>1 6>3 6>4 6>5", 6, 6},      // 22
    {"1 2 4 5", "3>2 6>4 6>5", 6, 6},          // 23
    {"1 2 3 4 5", "6>3 6>4 6>5", 6, 6},        // 24
    {"1 2 3 4 5", "6>4 6>5", 6, 6},            // 25
    {"1 2 4", "3>2 5>4 6>4", 6, 6},            // 26
    {"1 2 4", "3>2 5>4 6>4", 3, 3},            // 27
    {"1 3 6", "2>1 4>3 5>4", 5, 5},            // 28
    {"1 2 3 5", "4>3 6>5", 6, 6},              // 29
    {"1 2 3 6", "4>3 5>4", 5, 5},              // 30
    {"1 2 3 4 5", "6>5", 6, 6},                // 31
    {"1 2 3 4 5 6", "", 6, 6},                 // 32
};

AlgorithmSpec build(const AlgorithmRow& row) {
  AlgorithmSpec spec;
  std::istringstream carriers(row.carriers);
  for (int c; carriers >> c;) spec.carriers.push_back(c - 1);
  std::istringstream edges(row.edges);
  for (std::string e; edges >> e;) {
    const int mod = e[0] - '1';
    const int dst = e[2] - '1';
    spec.modulators[static_cast<std::size_t>(dst)].push_back(mod);
  }
  spec.feedback_op = row.feedback_op - 1;
  spec.feedback_source = row.feedback_source - 1;
  return spec;
}

std::array<AlgorithmSpec, 32> build_all() {
  std::array<AlgorithmSpec, 32> all;
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = build(kAlgorithms[i]);
  return all;
}

}  // namespace

const AlgorithmSpec& algorithm_table(int algorithm) {
  static const std::array<AlgorithmSpec, 32> table = build_all();
  if (algorithm < 1 || algorithm > 32) {
    throw Error(ErrorKind::UnknownAlgorithm, "algorithm " + std::to_string(algorithm) + " not in [1, 32]");
  }
  return table[static_cast<std::size_t>(algorithm - 1)];
}

VoiceConfig VoiceConfig::from_patch(const Dx7Patch& patch) {
  VoiceConfig v;
  v.algorithm = algorithm_table(patch.algorithm);
  v.operators = patch.operators;
  v.feedback_level = patch.feedback;
  v.sample_rate = kSampleRate;
  return v;
}

void SynthState::reset_oscillators() noexcept {
  phase.fill(0.0);
  fb_prev = 0.0;
  fb_prev2 = 0.0;
}

void SynthState::prime(const OpLevels& ol, double f0) noexcept {
  last_ol = ol;
  last_f0 = f0;
}

void render_window(const VoiceConfig& config, SynthState& state, const OpLevels& ol, double f0,
                   std::span<float> out) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const auto& alg = config.algorithm;
  const std::size_t n = out.size();
  const double fb_gain = config.feedback_level / 7.0;
  const double inv_sr = 1.0 / config.sample_rate;
  const double carrier_scale = 1.0 / static_cast<double>(alg.carriers.size());

  std::array<double, kNumOperators> x{};
  for (std::size_t t = 0; t < n; ++t) {
    const double alpha = static_cast<double>(t + 1) / static_cast<double>(n);
    const double f0_t = state.last_f0 + alpha * (f0 - state.last_f0);
    // Modulators always carry higher operator numbers, so OP6..OP1 order
    // evaluates every modulator before the operators it drives.
    for (int op = static_cast<int>(kNumOperators) - 1; op >= 0; --op) {
      const auto i = static_cast<std::size_t>(op);
      const double level = 2.0 * (state.last_ol[i] + alpha * (ol[i] - state.last_ol[i]));
      double pm = 0.0;
      for (int m : alg.modulators[i]) pm += x[static_cast<std::size_t>(m)];
      if (op == alg.feedback_op) pm += fb_gain * 0.5 * (state.fb_prev + state.fb_prev2);
      x[i] = level * std::sin(state.phase[i] + pm);
      if (op == alg.feedback_source) {
        state.fb_prev2 = state.fb_prev;
        state.fb_prev = x[i];
      }
      state.phase[i] += kTwoPi * op_frequency(config.operators[i], f0_t) * inv_sr;
    }
    double sum = 0.0;
    for (int c : alg.carriers) sum += x[static_cast<std::size_t>(c)];
    out[t] = static_cast<float>(sum * carrier_scale);
  }
  for (auto& p : state.phase) p = std::fmod(p, kTwoPi);
  state.last_ol = ol;
  state.last_f0 = f0;
}

std::vector<float> render_sequence(const VoiceConfig& config, std::span<const OlFrame> ol_seq,
                                   std::span<const double> f0_seq, int hop) {
  if (ol_seq.size() != f0_seq.size()) {
    throw Error(ErrorKind::ShapeMismatch, "render_sequence: " + std::to_string(ol_seq.size()) +
                                              " control frames vs " + std::to_string(f0_seq.size()) +
                                              " pitch frames");
  }
  if (hop < 1) throw Error(ErrorKind::InvalidArgument, "hop must be positive");
  std::vector<float> audio(ol_seq.size() * static_cast<std::size_t>(hop));
  SynthState state;
  const std::span<float> all(audio);
  for (std::size_t k = 0; k < ol_seq.size(); ++k) {
    OpLevels ol;
    for (std::size_t i = 0; i < kNumOperators; ++i) ol[i] = ol_seq[k][i];
    render_window(config, state, ol, f0_seq[k], all.subspan(k * static_cast<std::size_t>(hop), static_cast<std::size_t>(hop)));
  }
  return audio;
}

}  // namespace fmtt
