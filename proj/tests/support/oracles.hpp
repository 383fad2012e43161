#pragma once

// Reference implementations written independently of the library code paths
// they check. They favour obviousness over speed.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fmtt/dataset.hpp"
#include "fmtt/gru.hpp"

namespace fmtt::testing {

/// Empty when the tuple obeys the note/terminus alignment rules, otherwise a
/// description of the first violation.
inline std::string alignment_violation(const TrainingTuple& t, float silence = kOlSilence) {
  const std::size_t k = t.a.size();
  if (t.f.size() != k || t.ol.size() != k) return "sequence lengths differ";
  const auto live = [&](std::size_t i) {
    for (float v : t.ol[i]) {
      if (v >= silence) return true;
    }
    return false;
  };
  long first_a = -1, last_a = -1, first_f = -1, last_f = -1, last_ol = -1;
  for (std::size_t i = 0; i < k; ++i) {
    if (t.a[i] < 0.0f || t.a[i] > 1.0f || t.f[i] < 0.0f || t.f[i] > 1.0f) return "a or f out of range";
    for (float v : t.ol[i]) {
      if (v < 0.0f || v > 1.0f) return "ol out of range";
    }
    const long li = static_cast<long>(i);
    if (t.a[i] > 0.0f) {
      if (first_a < 0) first_a = li;
      last_a = li;
    }
    if (t.f[i] > 0.0f) {
      if (first_f < 0) first_f = li;
      last_f = li;
    }
    if (live(i)) last_ol = li;
  }
  if (first_a < 0) return "no note";
  // Note 0 has f = 0 throughout, so only a and ol locate it.
  const bool has_pitch = first_f >= 0;
  if (has_pitch && first_f != first_a) return "note-on of a and f differ";
  if (has_pitch && last_f != last_a) return "terminus of a and f differ";
  if (last_ol != last_a) return "terminus of a and ol differ";
  for (long i = 0; i < first_a; ++i) {
    for (float v : t.ol[static_cast<std::size_t>(i)]) {
      if (v != 0.0f) return "ol nonzero before note-on";
    }
  }
  for (std::size_t i = static_cast<std::size_t>(last_a) + 1; i < k; ++i) {
    for (float v : t.ol[i]) {
      if (v != 0.0f) return "ol nonzero after terminus";
    }
    if (t.f[i] != 0.0f) return "f nonzero after terminus";
  }
  for (long i = first_a; i <= last_a; ++i) {
    if (t.a[static_cast<std::size_t>(i)] <= 0.0f) return "gap inside the note";
  }

  // Held part is flat, then an affine ramp that would reach zero one frame
  // after the terminus.
  const float held = t.a[static_cast<std::size_t>(first_a)];
  std::size_t ramp = static_cast<std::size_t>(first_a);
  while (ramp < k && t.a[ramp] == held) ++ramp;
  for (std::size_t i = ramp; i <= static_cast<std::size_t>(last_a); ++i) {
    if (t.a[i] >= t.a[i - 1]) return "ramp not strictly decreasing";
  }
  const std::size_t stop = std::min<std::size_t>(static_cast<std::size_t>(last_a) + 1, k - 1);
  for (std::size_t i = ramp; i < stop; ++i) {
    const double d2 = static_cast<double>(t.a[i + 1]) - 2.0 * t.a[i] + t.a[i - 1];
    if (std::abs(d2) > 1e-6) return "ramp is not affine";
  }
  if (ramp > static_cast<std::size_t>(first_a) && ramp < k) {
    // Extrapolating the ramp one frame past the terminus lands on zero.
    const double step = static_cast<double>(t.a[ramp - 1]) - t.a[ramp];
    const double next = static_cast<double>(t.a[static_cast<std::size_t>(last_a)]) - step;
    if (static_cast<std::size_t>(last_a) + 1 < k && std::abs(next) > 1e-5) return "ramp does not end at the terminus";
  }
  return {};
}

/// Plain-loop GRU in double precision. Returns outputs as K x O.
inline std::vector<std::vector<double>> naive_gru(const GruParams<double>& p,
                                                  const std::vector<std::array<double, 2>>& xs,
                                                  std::vector<double>& h) {
  const int H = p.hidden_dim();
  const int O = static_cast<int>(p.b_out.size());
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<std::vector<double>> ys;
  for (const auto& x : xs) {
    std::vector<double> hn(static_cast<std::size_t>(H));
    for (int i = 0; i < H; ++i) {
      double az = p.b_in(i), ar = p.b_in(H + i), an = p.b_in(2 * H + i), m = p.c_n(i);
      for (int j = 0; j < 2; ++j) {
        az += p.w_in(i, j) * x[static_cast<std::size_t>(j)];
        ar += p.w_in(H + i, j) * x[static_cast<std::size_t>(j)];
        an += p.w_in(2 * H + i, j) * x[static_cast<std::size_t>(j)];
      }
      for (int j = 0; j < H; ++j) {
        const double hj = h[static_cast<std::size_t>(j)];
        az += p.u_rec(i, j) * hj;
        ar += p.u_rec(H + i, j) * hj;
        m += p.u_rec(2 * H + i, j) * hj;
      }
      const double z = sig(az), r = sig(ar);
      const double n = std::tanh(an + r * m);
      hn[static_cast<std::size_t>(i)] = (1.0 - z) * n + z * h[static_cast<std::size_t>(i)];
    }
    h = hn;
    std::vector<double> y(static_cast<std::size_t>(O));
    for (int o = 0; o < O; ++o) {
      double v = p.b_out(o);
      for (int j = 0; j < H; ++j) v += p.w_out(o, j) * h[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(o)] = v;
    }
    ys.push_back(y);
  }
  return ys;
}

inline GruParams<double> random_params(const ModelConfig& config, std::mt19937_64& rng, double scale) {
  auto p = GruParams<double>::zeros(config);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto t : p.tensors()) {
    for (auto& v : t) v = u(rng);
  }
  return p;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

/// Central finite differences of the batch-mean L1 loss against backward().
/// Relative error uses max(|analytic|, |numeric|, 1e-6) as the denominator.
inline GradCheck gradient_check(std::uint64_t seed, int hidden = 4, int frames = 8, int batch = 1,
                                double step = 1e-5) {
  std::mt19937_64 rng(seed);
  const ModelConfig config{2, hidden, 6};
  GruParams<double> p = random_params(config, rng, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ColMatrix<double> x(2, frames * batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = unit(rng);
  const ColMatrix<double> h0 = ColMatrix<double>::Zero(hidden, batch);

  // Targets keep a margin from the initial outputs so no |y - t| sits on the
  // kink of the absolute value during differencing.
  const auto base = forward_batch<double>(p, h0, x, batch);
  ColMatrix<double> target(6, frames * batch);
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    double t;
    do {
      t = unit(rng) * 2.0 - 0.5;
    } while (std::abs(t - base.y.data()[i]) < 1e-2);
    target.data()[i] = t;
  }
  const auto objective = [&](const GruParams<double>& q) {
    return l1_loss<double>(forward_batch<double>(q, h0, x, batch).y, target);
  };

  const GruParams<double> grad = l1_backward<double>(p, base, target).grad;
  GradCheck result;
  auto params = p.tensors();
  const auto analytic = grad.tensors();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double saved = params[t][i];
      params[t][i] = saved + step;
      const double up = objective(p);
      params[t][i] = saved - step;
      const double down = objective(p);
      params[t][i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(a - numeric) / denom);
      result.parameters += 1;
    }
  }
  return result;
}

}  // namespace fmtt::testing
