#ifndef OCN_CHECKPOINT_HPP
#define OCN_CHECKPOINT_HPP

#include <cstdint>
#include <string>

#include "ocn/detect.hpp"

namespace ocn {

std::uint32_t crc32(const void* data, std::size_t len);

// Binary detector checkpoint ("OCNP"), little-endian:
//   magic "OCNP", u32 version, payload, u32 CRC32(payload)
// where the payload is u32 n, u32 num_layers, u8 init_mode, then per layer
// w (2N x 6N f64, row-major), b (2N f64), t (f64). Round trip is bit-exact.
void save_checkpoint(const std::string& path, const DetectorParams& params);
DetectorParams load_checkpoint(const std::string& path);

}  // namespace ocn

#endif  // OCN_CHECKPOINT_HPP
