#include "sgg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"
#include "sgg/config.hpp"
#include "sgg/error.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace sgg {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'S', 'G', 'G', 'C', 'K', 'P', 'T', '\n'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IncompatibleCheckpoint("truncated header");
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModelParams& params) {
  const auto named = params.named();
  json index = json::array();
  std::size_t offset = 0;
  for (const auto& p : named) {
    index.push_back({{"name", p.name},
                     {"shape", p.tensor.shape()},
                     {"offset", offset},
                     {"trainable", p.tensor.requires_grad()}});
    offset += p.tensor.size();
  }
  const std::string header =
      json{{"model", to_json(params.config)}, {"vocab", to_json(params.vocab)}, {"tensors", index}}.dump();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& p : named) {
    auto d = p.tensor.data();
    out.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size_bytes()));
  }
  if (!out) throw IoError("failed writing checkpoint");
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, params);
}

ModelParams read_checkpoint(std::istream& in) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IncompatibleCheckpoint("not a checkpoint file");
  const auto version = take<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw IncompatibleCheckpoint("unsupported checkpoint version " + std::to_string(version));
  const auto header_len = take<std::uint64_t>(in);
  if (header_len > (1u << 30)) throw IncompatibleCheckpoint("implausible header length");
  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len)))
    throw IncompatibleCheckpoint("truncated header");

  ModelParams params;
  json h;
  try {
    h = json::parse(header);
    // Stored tensors replace every initial value, so the embedding file is not reread.
    ModelConfig config = model_config_from_json(h.at("model"));
    ModelConfig fresh = config;
    fresh.embeddings_path.clear();
    params = init_model(fresh, vocab_from_json(h.at("vocab")));
    params.config = config;
  } catch (const json::exception& e) {
    throw IncompatibleCheckpoint(std::string("bad header: ") + e.what());
  } catch (const InvalidConfig& e) {
    throw IncompatibleCheckpoint(std::string("bad header: ") + e.what());
  }

  auto named = params.named();
  const json& index = h.at("tensors");
  if (!index.is_array() || index.size() != named.size())
    throw IncompatibleCheckpoint("tensor count differs from the stored configuration");
  for (std::size_t k = 0; k < named.size(); ++k) {
    const json& entry = index[k];
    if (entry.at("name").get<std::string>() != named[k].name)
      throw IncompatibleCheckpoint("expected tensor '" + named[k].name + "', found '" +
                                   entry.at("name").get<std::string>() + "'");
    if (entry.at("shape").get<Shape>() != named[k].tensor.shape())
      throw IncompatibleCheckpoint("shape mismatch for '" + named[k].name + "'");
    Tensor t = named[k].tensor;
    auto d = t.mutable_data();
    if (!in.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size_bytes())))
      throw IncompatibleCheckpoint("truncated data for '" + named[k].name + "'");
    t.set_requires_grad(entry.at("trainable").get<bool>());
  }
  return params;
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

ModelParams load_checkpoint(const std::string& path, const Vocab& vocab) {
  ModelParams p = load_checkpoint(path);
  if (p.vocab != vocab) throw IncompatibleCheckpoint("checkpoint vocabulary differs from the config");
  return p;
}

}  // namespace sgg
