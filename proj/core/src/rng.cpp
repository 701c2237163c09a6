#include "obsel/rng.hpp"

namespace obsel {

namespace {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, std::string_view stream) {
  return mix(mix(master) ^ fnv1a(stream));
}

std::mt19937_64 substream_engine(std::uint64_t master, std::string_view stream) {
  return std::mt19937_64(substream_seed(master, stream));
}

}  // namespace obsel
