#include "jegauge/pnm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "jegauge/error.hpp"

namespace jegauge {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what) {
    skip_space_and_comments();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000) throw Error(ErrorKind::Format, std::string("PNM ") + what + " too large");
      ++pos_;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorKind::Format, std::string("PNM header missing ") + what);
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::Format, "PNM header not terminated by whitespace");
    }
    return pos_ + 1;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Frame decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorKind::Format, "only binary P5/P6 images are supported");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader header(bytes);
  const long width = header.number("width");
  const long height = header.number("height");
  const long maxval = header.number("maxval");
  if (width < 1 || height < 1) throw Error(ErrorKind::Format, "PNM extents must be >= 1");
  if (maxval != 255) throw Error(ErrorKind::Unsupported, "maxval " + std::to_string(maxval) + " (only 255 supported)");
  const std::size_t start = header.raster_start();
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - start < n) throw Error(ErrorKind::LengthMismatch, "PNM raster truncated");
  return Frame(static_cast<int>(height), static_cast<int>(width), channels,
               std::vector<std::uint8_t>(bytes.begin() + start, bytes.begin() + start + n));
}

std::vector<std::uint8_t> encode_pnm(const Frame& f) {
  const std::string header = std::string(f.channels == 1 ? "P5" : "P6") + "\n" + std::to_string(f.width) + " " +
                             std::to_string(f.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), f.pixels.begin(), f.pixels.end());
  return out;
}

Frame read_frame_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_pnm(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

void write_frame_pnm(const Frame& f, const std::filesystem::path& path) {
  const auto bytes = encode_pnm(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace jegauge
