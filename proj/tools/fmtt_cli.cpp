// fmtt: dataset generation, training, evaluation and tone-transfer rendering.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

#include "fmtt/audio.hpp"
#include "fmtt/error.hpp"
#include "fmtt/features.hpp"
#include "fmtt/pipeline.hpp"

namespace {

using namespace fmtt;

void add_patch_options(CLI::App* cmd, std::filesystem::path& bank, int& voice) {
  cmd->add_option("--patch", bank, "DX7 32-voice bank (.syx)")->required();
  cmd->add_option("--voice", voice, "voice index in the bank (0-31)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FM envelope learning and tone transfer"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Render a training dataset from one patch");
  add_patch_options(gen_cmd, gen.bank, gen.voice);
  gen_cmd->add_option("--notes", gen.notes, "number of random notes");
  gen_cmd->add_option("--frames", gen.frames, "frames per tuple (K)");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--out", gen.out, "output prefix; writes <out>.{train,valid,test}.fmtd")->required();

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "Train a GRU envelope model");
  train_cmd->add_option("--dataset", tr.dataset, "prefix given to gen")->required();
  train_cmd->add_option("--hidden", tr.hidden, "GRU hidden size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--steps", tr.train.total_steps)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", tr.train.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--clip", tr.train.clip_grad_norm, "gradient norm cap, 0 disables")
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lr", tr.train.learning_rate);
  train_cmd->add_option("--report-every", tr.train.report_every);
  train_cmd->add_option("--seed", tr.train.seed);
  train_cmd->add_option("--out", tr.out, "model file")->required();
  train_cmd->add_option("--loss-csv", tr.loss_csv, "defaults to <out>.loss.csv");
  bool keep_last = false;
  train_cmd->add_flag("--keep-last", keep_last, "save the final parameters, not the best validated ones");
  bool quiet = false;
  train_cmd->add_flag("--quiet", quiet, "do not print loss reports");

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Envelope L1 and segmented SNR on a test split");
  eval_cmd->add_option("--dataset", ev.dataset, "test file or gen prefix")->required();
  eval_cmd->add_option("--model", ev.model)->required();
  add_patch_options(eval_cmd, ev.bank, ev.voice);
  eval_cmd->add_option("--out", ev.out, "CSV with one result row");

  RenderCmdOptions rd;
  auto* render_cmd = app.add_subcommand("render", "Tone transfer of a 44.1 kHz WAV file");
  render_cmd->add_option("--in", rd.in)->required();
  render_cmd->add_option("--model", rd.model)->required();
  add_patch_options(render_cmd, rd.bank, rd.voice);
  render_cmd->add_option("--out", rd.out)->required();
  bool pcm16 = false;
  bool no_clamp = false;
  bool no_reset = false;
  render_cmd->add_flag("--pcm16", pcm16, "write 16-bit PCM instead of float32");
  render_cmd->add_flag("--no-clamp", no_clamp, "feed raw network outputs to the synth");
  render_cmd->add_flag("--no-reset", no_reset, "keep the hidden state through silence");

  BenchOptions bn;
  std::filesystem::path bench_model;
  auto* bench_cmd = app.add_subcommand("bench", "Per-frame latency of the streaming pipeline");
  bench_cmd->add_option("--model", bench_model)->check(CLI::ExistingFile);
  bench_cmd->add_option("--hidden", bn.hidden, "hidden size of a random model when --model is absent")
      ->check(CLI::PositiveNumber);
  add_patch_options(bench_cmd, bn.bank, bn.voice);
  bench_cmd->add_option("--frames", bn.frames);
  bench_cmd->add_option("--seed", bn.seed);

  std::filesystem::path summary_bank;
  int summary_voice = 0;
  auto* patch_cmd = app.add_subcommand("patch", "Print a decoded voice");
  add_patch_options(patch_cmd, summary_bank, summary_voice);

  std::filesystem::path feat_in;
  auto* feat_cmd = app.add_subcommand("features", "Print per-frame (a, f, f0) as CSV");
  feat_cmd->add_option("--in", feat_in)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) {
      const auto r = cmd_gen(gen);
      const char* names[] = {"train", "valid", "test"};
      for (std::size_t i = 0; i < 3; ++i) {
        std::printf("%s: %zu tuples -> %s\n", names[i], r.sizes[i], r.files[i].string().c_str());
      }
      std::printf("occupancy: %.4f\n", r.occupancy);
    } else if (*train_cmd) {
      tr.train.keep_best_valid = !keep_last;
      const auto r = cmd_train(tr, [quiet](const LossReport& rep) {
        if (!quiet) {
          std::printf("step %d train_l1 %.6f valid_l1 %.6f lr %.3g\n", rep.step, rep.train_l1,
                      rep.valid_l1, rep.learning_rate);
          std::fflush(stdout);
        }
      });
      std::printf("wrote %s (%zu parameters, step %d)\n", tr.out.string().c_str(),
                  r.params.parameter_count(), r.best_step);
    } else if (*eval_cmd) {
      const auto row = cmd_eval(ev);
      std::printf("patch \"%s\" envelope_l1 %.6e snr_onset_db %.2f snr_mid_db %.2f snr_end_db %.2f\n",
                  row.patch_name.c_str(), row.envelope_l1, row.snr_onset_db, row.snr_mid_db,
                  row.snr_end_db);
    } else if (*render_cmd) {
      rd.encoding = pcm16 ? WavEncoding::Pcm16 : WavEncoding::Float32;
      rd.render.clamp_outputs = !no_clamp;
      rd.render.reset_on_silence = !no_reset;
      const auto n = cmd_render(rd);
      std::printf("wrote %zu samples to %s\n", n, rd.out.string().c_str());
    } else if (*bench_cmd) {
      if (!bench_model.empty()) bn.model = bench_model;
      std::fputs(format_bench_report(cmd_bench(bn)).c_str(), stdout);
    } else if (*patch_cmd) {
      std::fputs(patch_summary(load_patch(summary_bank, summary_voice)).c_str(), stdout);
    } else if (*feat_cmd) {
      const auto frames = analyze(read_wav(feat_in));
      std::printf("frame_index,a,f,f0_hz\n");
      for (std::size_t k = 0; k < frames.size(); ++k) {
        std::printf("%zu,%.6f,%.6f,%.3f\n", k, frames[k].a, frames[k].f, frames[k].f0);
      }
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Internal: %s\n", e.what());
    return 3;
  }
  return 0;
}
