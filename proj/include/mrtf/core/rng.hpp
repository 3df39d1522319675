#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mrtf {

using Rng = std::mt19937_64;

/// Independent, reproducible generator for a (seed, purpose, ids...) tuple.
/// Streams never depend on scheduling order, so parallel callers stay bit-deterministic.
Rng make_stream(std::uint64_t seed, std::string_view purpose, std::initializer_list<std::uint64_t> ids = {});

/// Derives a 64-bit seed from the same tuple, for APIs that take a raw seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose, std::initializer_list<std::uint64_t> ids = {});

}  // namespace mrtf
