#pragma once

#include <filesystem>
#include <iosfwd>

#include "mrtf/nn/mlp.hpp"

// Binary model file: "MRTFMDL1", then little-endian u32 input_dim, u32 hidden
// layer count, u32 per hidden width, u32 num_classes, u32 activation, u64
// parameter count and the parameters as IEEE-754 binary64.

namespace mrtf::io {

void write_model(std::ostream& out, const nn::ParamVector& params);
/// Throws ValueError on a bad magic, truncated payload or inconsistent arch.
nn::ParamVector read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const nn::ParamVector& params);
nn::ParamVector load_model(const std::filesystem::path& path);

}  // namespace mrtf::io
