#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "apifk/predictor/model.hpp"

namespace apifk::predictor {

// Binary checkpoint container, all integers and floats little-endian:
//
//   "CAPI"            4 bytes magic
//   version           u32 (kCheckpointVersion)
//   variant           u8  (0 large, 1 small, 2 tiny)
//   input_length      u64
//   dropout           f64
//   alphabet          u32 count, then count x u32 code points
//   labels            u32 count, then count x (u32 byte length, UTF-8 bytes)
//   conv layers       6 x (u64 in, u64 out, u64 kernel, u64 stride, u64 pool; pool 0 = none)
//   fc layers         3 x u64 output units
//   parameters        u64 count, then count x f64
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const ConvNetModel& model);
// Throws MalformedDocument on bad magic, truncation or inconsistent sizes,
// SchemaVersionMismatch on an unknown version.
ConvNetModel decode_checkpoint(std::string_view bytes);

// Atomic write (temp file + rename). Throws IoError.
void save_checkpoint(const ConvNetModel& model, const std::string& path);
ConvNetModel load_checkpoint(const std::string& path);

}  // namespace apifk::predictor
