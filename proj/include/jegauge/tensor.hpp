#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace jegauge {

enum class DType : std::uint8_t { Float32 = 1, UInt8 = 2 };

/// Row-major n-dimensional array (rank 1..4) holding float32 or uint8 data.
///
/// This is the carrier for activation stacks, flow fields, segment masks and
/// all per-frame maps. Construction validates that the element count matches
/// the product of the extents.
class Tensor {
 public:
  using Shape = std::vector<std::uint32_t>;

  Tensor(Shape shape, std::vector<float> data);
  Tensor(Shape shape, std::vector<std::uint8_t> data);

  static Tensor zeros(DType dtype, Shape shape);

  DType dtype() const noexcept;
  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept;

  std::span<const float> f32() const;
  std::span<float> f32();
  std::span<const std::uint8_t> u8() const;
  std::span<std::uint8_t> u8();

  /// Bit-exact comparison (float payloads compared by representation).
  friend bool operator==(const Tensor& a, const Tensor& b);

 private:
  Shape shape_;
  std::variant<std::vector<float>, std::vector<std::uint8_t>> data_;
};

std::size_t element_count(const Tensor::Shape& shape);

/// Encodes `t` in the GCT1 layout: magic "GCT1", dtype byte, rank byte,
/// u32-LE extents, then the little-endian row-major payload.
std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace jegauge
