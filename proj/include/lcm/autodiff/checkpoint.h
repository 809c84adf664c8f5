#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "lcm/autodiff/parameter_store.h"

namespace lcm::ad {

// Binary parameter file:
//   magic "LCMPARAM" | u32 version | u32 record count
//   per record: u32 name length | name bytes | u32 rank | u64 dims[rank]
//               | f64 values[prod(dims)]
//   u64 FNV-1a checksum of every preceding byte
// Integers and doubles are little-endian; values round-trip bit-exactly.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_parameters(const ParameterStore& store);
std::map<std::string, Tensor> deserialize_parameters(const std::string& bytes);

void save_checkpoint(const ParameterStore& store, const std::string& path);
std::map<std::string, Tensor> read_checkpoint(const std::string& path);
// Overwrites every parameter of `store` from the file. Missing names or
// shape disagreements raise CheckpointError.
void load_checkpoint(ParameterStore& store, const std::string& path);
void load_parameters(ParameterStore& store, const std::map<std::string, Tensor>& values);

}  // namespace lcm::ad
