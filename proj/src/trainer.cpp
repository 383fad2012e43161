#include "fmtt/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <limits>
#include <random>
#include <utility>

namespace fmtt {

namespace {

constexpr std::size_t kEvalChunk = 64;

void check_compatible(const Dataset& ds, const ModelConfig& model, const char* what) {
  if (ds.tuples.empty()) throw Error(ErrorKind::EmptyDataset, std::string(what) + " set is empty");
  if (model.input_dim != 2 || model.output_dim != static_cast<int>(kNumOperators)) {
    throw Error(ErrorKind::ShapeMismatch, "model must map 2 inputs to 6 outputs");
  }
}

}  // namespace

double learning_rate_at(const TrainConfig& config, std::int64_t step) noexcept {
  const auto epochs = config.decay_every > 0 ? step / config.decay_every : 0;
  return config.learning_rate * std::pow(config.lr_decay, static_cast<double>(epochs));
}

double clip_grad_norm(GruParams<float>& grads, double max_norm) noexcept {
  double sq = 0.0;
  for (const auto& t : std::as_const(grads).tensors()) {
    for (float g : t) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const auto scale = static_cast<float>(max_norm / norm);
    for (auto t : grads.tensors()) {
      for (auto& g : t) g *= scale;
    }
  }
  return norm;
}

void adam_step(GruParams<float>& params, const GruParams<float>& grads, AdamState& state,
               double lr, const TrainConfig& config) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const auto b1 = static_cast<float>(config.adam_beta1);
  const auto b2 = static_cast<float>(config.adam_beta2);
  const auto step_size = static_cast<float>(lr / (1.0 - std::pow(config.adam_beta1, t)));
  const auto root_correction = static_cast<float>(std::sqrt(1.0 - std::pow(config.adam_beta2, t)));
  const auto eps = static_cast<float>(config.adam_eps);

  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].size() != g[i].size() || p[i].size() != m[i].size()) {
      throw Error(ErrorKind::ShapeMismatch, "adam_step: tensor shapes differ");
    }
    for (std::size_t j = 0; j < p[i].size(); ++j) {
      m[i][j] = b1 * m[i][j] + (1.0f - b1) * g[i][j];
      v[i][j] = b2 * v[i][j] + (1.0f - b2) * g[i][j] * g[i][j];
      p[i][j] -= step_size * m[i][j] / (std::sqrt(v[i][j]) / root_correction + eps);
    }
  }
}

void pack_batch(const Dataset& ds, std::span<const std::size_t> indices, ColMatrix<float>& inputs,
                ColMatrix<float>& targets) {
  const auto b = static_cast<Eigen::Index>(indices.size());
  const auto k = static_cast<Eigen::Index>(ds.meta.frames);
  inputs.resize(2, k * b);
  targets.resize(static_cast<Eigen::Index>(kNumOperators), k * b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const auto& t = ds.tuples[indices[static_cast<std::size_t>(j)]];
    if (static_cast<Eigen::Index>(t.frames()) != k) {
      throw Error(ErrorKind::ShapeMismatch, "tuple length differs from dataset K");
    }
    for (Eigen::Index f = 0; f < k; ++f) {
      const Eigen::Index col = f * b + j;
      inputs(0, col) = t.a[static_cast<std::size_t>(f)];
      inputs(1, col) = t.f[static_cast<std::size_t>(f)];
      for (std::size_t op = 0; op < kNumOperators; ++op) {
        targets(static_cast<Eigen::Index>(op), col) = t.ol[static_cast<std::size_t>(f)][op];
      }
    }
  }
}

double dataset_l1(const GruParams<float>& params, const Dataset& ds) {
  if (ds.tuples.empty()) throw Error(ErrorKind::EmptyDataset, "cannot evaluate an empty dataset");
  double sum = 0.0;
  std::vector<std::size_t> idx;
  ColMatrix<float> x, target;
  for (std::size_t start = 0; start < ds.size(); start += kEvalChunk) {
    idx.resize(std::min(kEvalChunk, ds.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    pack_batch(ds, idx, x, target);
    const auto b = static_cast<int>(idx.size());
    const auto cache = forward_batch<float>(params, ColMatrix<float>::Zero(params.hidden_dim(), b), x, b);
    sum += (cache.y - target).array().abs().cast<double>().sum();
  }
  return sum / (static_cast<double>(ds.size()) * ds.meta.frames * kNumOperators);
}

TrainResult train(const Dataset& train_set, const Dataset& valid_set, const ModelConfig& model,
                  const TrainConfig& config, const ReportCallback& on_report) {
  check_compatible(train_set, model, "training");
  check_compatible(valid_set, model, "validation");
  if (config.batch_size < 1 || config.total_steps < 0) {
    throw Error(ErrorKind::InvalidArgument, "batch size must be positive and steps nonnegative");
  }

  TrainResult result;
  result.params = init_params(model, config.seed);
  AdamState adam = AdamState::zeros(model);

  std::mt19937_64 rng(config.seed ^ 0xD1B54A32D192ED03ull);
  std::uniform_int_distribution<std::size_t> pick(0, train_set.size() - 1);
  std::vector<std::size_t> batch(static_cast<std::size_t>(config.batch_size));
  ColMatrix<float> x, target;
  const ColMatrix<float> h0 = ColMatrix<float>::Zero(model.hidden_dim, config.batch_size);

  GruParams<float> best = result.params;
  double best_valid = std::numeric_limits<double>::infinity();
  double window_sum = 0.0;
  int window_count = 0;
  result.step_losses.reserve(static_cast<std::size_t>(config.total_steps));
  for (int step = 1; step <= config.total_steps; ++step) {
    for (auto& i : batch) i = pick(rng);
    pack_batch(train_set, batch, x, target);
    const auto cache = forward_batch<float>(result.params, h0, x, config.batch_size);
    auto lg = l1_backward<float>(result.params, cache, target);
    clip_grad_norm(lg.grad, config.clip_grad_norm);
    const double lr = learning_rate_at(config, step - 1);
    adam_step(result.params, lg.grad, adam, lr, config);

    result.step_losses.push_back(lg.loss);
    window_sum += lg.loss;
    window_count += 1;
    const bool report = step == 1 || step == config.total_steps ||
                        (config.report_every > 0 && step % config.report_every == 0);
    if (report) {
      LossReport r;
      r.step = step;
      r.train_l1 = window_sum / window_count;
      r.valid_l1 = dataset_l1(result.params, valid_set);
      r.learning_rate = lr;
      result.reports.push_back(r);
      if (r.valid_l1 < best_valid) {
        best_valid = r.valid_l1;
        best = result.params;
        result.best_step = step;
      }
      if (on_report) on_report(r);
      window_sum = 0.0;
      window_count = 0;
    }
  }
  if (config.keep_best_valid) {
    result.params = std::move(best);
  } else {
    result.best_step = config.total_steps;
  }
  return result;
}

void write_loss_csv(std::span<const LossReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << "step,train_l1,valid_l1,lr\n";
  char line[128];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g\n", r.step, r.train_l1, r.valid_l1,
                  r.learning_rate);
    out << line;
  }
}

}  // namespace fmtt
