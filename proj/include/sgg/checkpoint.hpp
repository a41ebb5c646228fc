#pragma once

#include <iosfwd>
#include <string>

#include "sgg/model.hpp"

namespace sgg {

// Binary layout: "SGGCKPT\n", uint32 version, uint64 header length, a JSON
// header (model config, vocabulary, tensor index), then raw little-endian
// doubles. Values round-trip bit-exactly.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ModelParams& params);
void save_checkpoint(const std::string& path, const ModelParams& params);

// Throws IncompatibleCheckpoint on a bad magic, version, tensor set or shape.
ModelParams read_checkpoint(std::istream& in);
ModelParams load_checkpoint(const std::string& path);

// Additionally requires the stored vocabulary to equal `vocab`.
ModelParams load_checkpoint(const std::string& path, const Vocab& vocab);

}  // namespace sgg
