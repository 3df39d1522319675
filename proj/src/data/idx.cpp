#include "mrtf/data/idx.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace mrtf::data {

namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxError::Kind::io, "cannot open IDX file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) {
    throw IdxError(IdxError::Kind::truncated, "IDX file " + path.string() + " truncated in header");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex;
  os.width(8);
  os.fill('0');
  os << v;
  return os.str();
}

void check_magic(std::uint32_t got, std::uint32_t expected, const std::filesystem::path& path) {
  if (got != expected) {
    throw IdxError(IdxError::Kind::bad_magic,
                   "IDX file " + path.string() + ": bad magic " + hex(got) + ", expected " + hex(expected));
  }
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                        std::optional<std::size_t> num_classes) {
  const auto images = read_all(images_path);
  check_magic(read_be32(images, 0, images_path), kIdxImageMagic, images_path);
  const std::size_t count = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t dim = rows * cols;
  if (images.size() < 16 + count * dim) {
    throw IdxError(IdxError::Kind::truncated, "IDX image file " + images_path.string() + " holds fewer than " +
                                                  std::to_string(count) + " images");
  }

  const auto labels = read_all(labels_path);
  check_magic(read_be32(labels, 0, labels_path), kIdxLabelMagic, labels_path);
  const std::size_t label_count = read_be32(labels, 4, labels_path);
  if (labels.size() < 8 + label_count) {
    throw IdxError(IdxError::Kind::truncated, "IDX label file " + labels_path.string() + " holds fewer than " +
                                                  std::to_string(label_count) + " labels");
  }
  if (label_count != count) {
    throw IdxError(IdxError::Kind::count_mismatch, "IDX count mismatch: " + std::to_string(count) + " images vs " +
                                                       std::to_string(label_count) + " labels");
  }

  LabeledDataset out{Matrix(count, dim), {}, 0};
  for (std::size_t i = 0; i < count * dim; ++i) out.features.values()[i] = images[16 + i] / 255.0;
  out.labels.reserve(count);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    out.labels.push_back(labels[8 + i]);
    max_label = std::max(max_label, out.labels.back());
  }
  out.num_classes = num_classes.value_or(std::max<std::size_t>(2, static_cast<std::size_t>(max_label) + 1));
  if (static_cast<std::size_t>(max_label) >= out.num_classes) {
    throw IdxError(IdxError::Kind::bad_label, "IDX label " + std::to_string(max_label) + " exceeds class count " +
                                                  std::to_string(out.num_classes));
  }
  return out;
}

}  // namespace mrtf::data
