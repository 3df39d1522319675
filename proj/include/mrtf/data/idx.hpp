#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "mrtf/core/error.hpp"
#include "mrtf/data/dataset.hpp"

namespace mrtf::data {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

class IdxError : public Error {
 public:
  enum class Kind { io, bad_magic, truncated, count_mismatch, bad_label };

  IdxError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Reads an IDX image file (magic 0x00000803, big-endian count/rows/cols, then raw
/// unsigned bytes) and an IDX label file (magic 0x00000801). Pixels are scaled to
/// [0, 1]. `num_classes` defaults to max(label) + 1 (and at least 2).
LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::optional<std::size_t> num_classes = std::nullopt);

}  // namespace mrtf::data
