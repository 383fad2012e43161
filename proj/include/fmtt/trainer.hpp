#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "fmtt/dataset.hpp"
#include "fmtt/gru.hpp"

namespace fmtt {

struct TrainConfig {
  double learning_rate = 1e-3;
  double lr_decay = 0.98;
  int decay_every = 10000;
  int batch_size = 32;
  int total_steps = 120000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Global gradient norm cap applied before each Adam step; 0 disables.
  double clip_grad_norm = 1.0;
  /// Return the parameters of the report with the lowest validation L1
  /// instead of the final ones.
  bool keep_best_valid = true;
  int report_every = 500;
  std::uint64_t seed = 0;
};

struct AdamState {
  GruParams<float> m;
  GruParams<float> v;
  std::int64_t step = 0;

  static AdamState zeros(const ModelConfig& config) {
    return {GruParams<float>::zeros(config), GruParams<float>::zeros(config), 0};
  }
};

struct LossReport {
  int step = 0;
  double train_l1 = 0.0;  // mean batch loss since the previous report
  double valid_l1 = 0.0;
  double learning_rate = 0.0;
};

struct TrainResult {
  GruParams<float> params;
  std::vector<LossReport> reports;
  std::vector<float> step_losses;  // batch L1 of every step
  int best_step = 0;               // report step whose parameters were returned; 0 = init
};

/// lr0 * decay^floor(step / decay_every), step counted from 0.
double learning_rate_at(const TrainConfig& config, std::int64_t step) noexcept;

/// Bias-corrected Adam; eps is added to the corrected second-moment root.
void adam_step(GruParams<float>& params, const GruParams<float>& grads, AdamState& state,
               double lr, const TrainConfig& config);

/// Rescales grads so their global L2 norm is at most max_norm (no-op when
/// max_norm <= 0). Returns the norm before clipping.
double clip_grad_norm(GruParams<float>& grads, double max_norm) noexcept;

/// Packs tuples into (I x K*B) inputs and (O x K*B) targets.
void pack_batch(const Dataset& ds, std::span<const std::size_t> indices, ColMatrix<float>& inputs,
                ColMatrix<float>& targets);

/// Mean L1 of the model over every frame and channel of `ds`, from zero state.
double dataset_l1(const GruParams<float>& params, const Dataset& ds);

using ReportCallback = std::function<void(const LossReport&)>;

/// Samples batches with replacement for `total_steps` steps.
TrainResult train(const Dataset& train_set, const Dataset& valid_set, const ModelConfig& model,
                  const TrainConfig& config, const ReportCallback& on_report = {});

/// Header plus one row per report: step,train_l1,valid_l1,lr.
void write_loss_csv(std::span<const LossReport> reports, const std::filesystem::path& path);

}  // namespace fmtt
