#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ringdrive/qnet.hpp"

namespace ringdrive {

// On-disk training state. The header carries the architecture and the
// affordance-ordering hash so a stale or foreign file is rejected instead of
// silently mis-feeding the network; all floats are little-endian 64-bit.
struct Checkpoint {
  QNetwork net;
  std::optional<AdamState> adam;
  std::int64_t episodes_completed = 0;
  std::optional<std::string> rng_state;  // serialized mt19937_64, for resume
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Checkpoint& c);

// Throws std::runtime_error on a bad magic, version, or feature-order hash.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ringdrive
