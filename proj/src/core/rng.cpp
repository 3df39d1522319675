#include "mrtf/core/rng.hpp"

#include <array>
#include <vector>

namespace mrtf {

namespace {

std::uint32_t fnv1a(std::string_view s) {
  std::uint32_t h = 2166136261u;
  for (unsigned char c : s) {
    h ^= c;
    h *= 16777619u;
  }
  return h;
}

std::seed_seq make_seq(std::uint64_t seed, std::string_view purpose, std::initializer_list<std::uint64_t> ids) {
  std::vector<std::uint32_t> words;
  words.reserve(3 + 2 * ids.size());
  words.push_back(static_cast<std::uint32_t>(seed));
  words.push_back(static_cast<std::uint32_t>(seed >> 32));
  words.push_back(fnv1a(purpose));
  for (auto id : ids) {
    words.push_back(static_cast<std::uint32_t>(id));
    words.push_back(static_cast<std::uint32_t>(id >> 32));
  }
  return std::seed_seq(words.begin(), words.end());
}

}  // namespace

Rng make_stream(std::uint64_t seed, std::string_view purpose, std::initializer_list<std::uint64_t> ids) {
  auto seq = make_seq(seed, purpose, ids);
  return Rng(seq);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::initializer_list<std::uint64_t> ids) {
  auto seq = make_seq(seed, purpose, ids);
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace mrtf
