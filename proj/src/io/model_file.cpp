#include "mrtf/io/model_file.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "mrtf/core/error.hpp"

namespace mrtf::io {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'R', 'T', 'F', 'M', 'D', 'L', '1'};
// Guards against allocating absurd sizes from a corrupt header.
constexpr std::uint32_t kMaxDim = 1u << 24;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw ValueError("model file: truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

std::uint32_t get_dim(std::istream& in, const char* what) {
  const auto v = get<std::uint32_t>(in);
  if (v > kMaxDim) throw ValueError(std::string("model file: implausible ") + what);
  return v;
}

}  // namespace

void write_model(std::ostream& out, const nn::ParamVector& params) {
  const auto& arch = params.arch();
  out.write(kMagic.data(), kMagic.size());
  put(out, static_cast<std::uint32_t>(arch.input_dim));
  put(out, static_cast<std::uint32_t>(arch.hidden_dims.size()));
  for (auto h : arch.hidden_dims) put(out, static_cast<std::uint32_t>(h));
  put(out, static_cast<std::uint32_t>(arch.num_classes));
  put(out, static_cast<std::uint32_t>(arch.activation));
  put(out, static_cast<std::uint64_t>(params.size()));
  for (double v : params.values()) put(out, std::bit_cast<std::uint64_t>(v));
  if (!out) throw ValueError("model file: write failed");
}

nn::ParamVector read_model(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw ValueError("model file: truncated");
  if (magic != kMagic) throw ValueError("model file: bad magic");
  nn::MlpArch arch;
  arch.input_dim = get_dim(in, "input_dim");
  const auto layers = get_dim(in, "hidden layer count");
  for (std::uint32_t i = 0; i < layers; ++i) arch.hidden_dims.push_back(get_dim(in, "hidden width"));
  arch.num_classes = get_dim(in, "num_classes");
  if (get<std::uint32_t>(in) != static_cast<std::uint32_t>(nn::Activation::relu)) {
    throw ValueError("model file: unknown activation");
  }
  arch.validate();
  const auto count = get<std::uint64_t>(in);
  if (count != arch.param_count()) throw DimensionError("model file: parameter count", arch.param_count(), count);
  std::vector<double> values(count);
  for (auto& v : values) v = std::bit_cast<double>(get<std::uint64_t>(in));
  return nn::ParamVector(std::move(arch), std::move(values));
}

void save_model(const std::filesystem::path& path, const nn::ParamVector& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValueError("cannot write " + path.string());
  write_model(out, params);
}

nn::ParamVector load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValueError("cannot read " + path.string());
  return read_model(in);
}

}  // namespace mrtf::io
