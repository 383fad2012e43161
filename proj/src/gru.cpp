#include "fmtt/gru.hpp"

#include <cmath>
#include <random>
#include <string_view>

#include "binary_io.hpp"

namespace fmtt {

namespace {
constexpr char kMagic[] = "FMTM";
}

GruParams<float> init_params(const ModelConfig& config, std::uint64_t seed) {
  if (config.hidden_dim < 1 || config.input_dim < 1 || config.output_dim < 1) {
    throw Error(ErrorKind::InvalidArgument, "model dimensions must be positive");
  }
  auto p = GruParams<float>::zeros(config);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto tensor : p.tensors()) {
    for (auto& v : tensor) v = static_cast<float>(dist(rng));
  }
  return p;
}

void save_model(const GruParams<float>& params, const std::filesystem::path& path) {
  const ModelConfig cfg = params.config();
  detail::ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put<std::uint16_t>(kModelVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.input_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.hidden_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(cfg.output_dim));
  for (const auto& t : params.tensors()) w.put_floats(t);
  detail::write_file(path, w.bytes());
}

GruParams<float> load_model(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() < 4 || std::string_view(reinterpret_cast<const char*>(bytes.data()), 4) != kMagic) {
    throw Error(ErrorKind::BadMagic, path.string() + " is not a model file");
  }
  detail::ByteReader r(bytes);
  r.get_string(4);
  const auto version = r.get<std::uint16_t>();
  if (version != kModelVersion) {
    throw Error(ErrorKind::VersionMismatch, "model version " + std::to_string(version));
  }
  ModelConfig cfg;
  cfg.input_dim = static_cast<int>(r.get<std::uint32_t>());
  cfg.hidden_dim = static_cast<int>(r.get<std::uint32_t>());
  cfg.output_dim = static_cast<int>(r.get<std::uint32_t>());
  if (cfg.input_dim != 2 || cfg.output_dim != 6 || cfg.hidden_dim < 1 || cfg.hidden_dim > (1 << 16)) {
    throw Error(ErrorKind::ShapeMismatch, "model dims " + std::to_string(cfg.input_dim) + "/" +
                                              std::to_string(cfg.hidden_dim) + "/" +
                                              std::to_string(cfg.output_dim) + " unsupported");
  }
  auto p = GruParams<float>::zeros(cfg);
  const std::size_t expected = p.parameter_count() * sizeof(float);
  if (r.remaining() != expected) {
    throw Error(ErrorKind::ShapeMismatch, "payload is " + std::to_string(r.remaining()) +
                                              " bytes, header implies " + std::to_string(expected));
  }
  for (auto t : p.tensors()) r.get_floats(t);
  return p;
}

}  // namespace fmtt
