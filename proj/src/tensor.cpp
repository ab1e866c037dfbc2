#include "jegauge/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "jegauge/error.hpp"

namespace jegauge {

namespace {

constexpr char kMagic[4] = {'G', 'C', 'T', '1'};
constexpr std::size_t kMaxRank = 4;

void check_shape(const Tensor::Shape& shape, std::size_t n) {
  if (shape.empty() || shape.size() > kMaxRank) {
    throw Error(ErrorKind::Dimension, "tensor rank must be in [1, 4], got " + std::to_string(shape.size()));
  }
  for (auto e : shape) {
    if (e == 0) throw Error(ErrorKind::Dimension, "tensor extents must be >= 1");
  }
  if (element_count(shape) != n) {
    throw Error(ErrorKind::LengthMismatch, "element count " + std::to_string(n) +
                                               " does not match shape product " +
                                               std::to_string(element_count(shape)));
  }
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t element_count(const Tensor::Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t acc, std::uint32_t e) { return acc * e; });
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_, std::get<0>(data_).size());
}

Tensor::Tensor(Shape shape, std::vector<std::uint8_t> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_, std::get<1>(data_).size());
}

Tensor Tensor::zeros(DType dtype, Shape shape) {
  const auto n = element_count(shape);
  if (dtype == DType::Float32) return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
  return Tensor(std::move(shape), std::vector<std::uint8_t>(n, 0));
}

DType Tensor::dtype() const noexcept { return data_.index() == 0 ? DType::Float32 : DType::UInt8; }

std::size_t Tensor::size() const noexcept { return element_count(shape_); }

std::span<const float> Tensor::f32() const {
  if (dtype() != DType::Float32) throw Error(ErrorKind::UnsupportedDtype, "expected float32 tensor");
  return std::get<0>(data_);
}

std::span<float> Tensor::f32() {
  if (dtype() != DType::Float32) throw Error(ErrorKind::UnsupportedDtype, "expected float32 tensor");
  return std::get<0>(data_);
}

std::span<const std::uint8_t> Tensor::u8() const {
  if (dtype() != DType::UInt8) throw Error(ErrorKind::UnsupportedDtype, "expected uint8 tensor");
  return std::get<1>(data_);
}

std::span<std::uint8_t> Tensor::u8() {
  if (dtype() != DType::UInt8) throw Error(ErrorKind::UnsupportedDtype, "expected uint8 tensor");
  return std::get<1>(data_);
}

bool operator==(const Tensor& a, const Tensor& b) {
  if (a.shape_ != b.shape_ || a.dtype() != b.dtype()) return false;
  if (a.dtype() == DType::UInt8) return std::get<1>(a.data_) == std::get<1>(b.data_);
  const auto& x = std::get<0>(a.data_);
  const auto& y = std::get<0>(b.data_);
  return std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  const std::size_t elem = t.dtype() == DType::Float32 ? 4 : 1;
  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * t.rank() + elem * t.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::uint8_t>(t.dtype()));
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (auto e : t.shape()) put_u32(out, e);
  if (t.dtype() == DType::UInt8) {
    const auto d = t.u8();
    out.insert(out.end(), d.begin(), d.end());
  } else {
    for (float v : t.f32()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::Format, "missing GCT1 magic");
  }
  const auto code = bytes[4];
  if (code != static_cast<std::uint8_t>(DType::Float32) && code != static_cast<std::uint8_t>(DType::UInt8)) {
    throw Error(ErrorKind::UnsupportedDtype, "dtype code " + std::to_string(code));
  }
  const std::size_t rank = bytes[5];
  if (rank < 1 || rank > kMaxRank) throw Error(ErrorKind::Format, "rank " + std::to_string(rank) + " outside [1, 4]");
  if (bytes.size() < 6 + 4 * rank) throw Error(ErrorKind::LengthMismatch, "truncated header");
  Tensor::Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    shape[i] = get_u32(bytes.data() + 6 + 4 * i);
    if (shape[i] == 0) throw Error(ErrorKind::Format, "zero extent in header");
  }
  const std::size_t n = element_count(shape);
  const std::size_t elem = code == 1 ? 4 : 1;
  const auto payload = bytes.subspan(6 + 4 * rank);
  if (payload.size() != n * elem) {
    throw Error(ErrorKind::LengthMismatch, "declared " + std::to_string(n) + " elements, payload holds " +
                                               std::to_string(payload.size()) + " bytes");
  }
  if (code == 2) return Tensor(std::move(shape), std::vector<std::uint8_t>(payload.begin(), payload.end()));
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<float>(get_u32(payload.data() + 4 * i));
  return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

}  // namespace jegauge
