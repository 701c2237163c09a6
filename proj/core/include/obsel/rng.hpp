#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace obsel {

/// Derives a decorrelated engine seed from a master seed and a stream name.
/// All randomness in a run flows from one master seed; every consumer asks
/// for its own named sub-stream so that adding a consumer never shifts the
/// draws seen by the others.
std::uint64_t substream_seed(std::uint64_t master, std::string_view stream);

/// Convenience: a Mersenne engine seeded for the named sub-stream.
std::mt19937_64 substream_engine(std::uint64_t master, std::string_view stream);

}  // namespace obsel
