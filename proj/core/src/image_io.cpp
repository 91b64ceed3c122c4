#include "palpa/image_io.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>

namespace palpa {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads a decimal token.
  unsigned long next_number() {
    skip_separators();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw IoError(IoErrc::malformed_header, "malformed header: expected a number");
    }
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 0xFFFFFFFFul) throw IoError(IoErrc::malformed_header, "malformed header: number too large");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw IoError(IoErrc::malformed_header, "malformed header: missing separator before pixel data");
    }
    return pos_ + 1;
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

constexpr std::size_t kDmapHeaderSize = 4 + 1 + 4 + 4;

}  // namespace

std::vector<std::uint8_t> encode_ppm(const RgbImage& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.bytes().begin(), img.bytes().end());
  return out;
}

RgbImage decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw IoError(IoErrc::malformed_header, "malformed header: not a binary PPM (P6)");
  }
  HeaderReader reader(bytes);
  const auto width = reader.next_number();
  const auto height = reader.next_number();
  const auto maxval = reader.next_number();
  if (width == 0 || height == 0 || width > 1u << 16 || height > 1u << 16) {
    throw IoError(IoErrc::malformed_header, "malformed header: bad dimensions");
  }
  if (maxval != 255) {
    throw IoError(IoErrc::unsupported_maxval, "unsupported maxval " + std::to_string(maxval));
  }
  const std::size_t start = reader.raster_start();
  const std::size_t need = width * height * 3;
  if (bytes.size() < start + need) {
    throw IoError(IoErrc::truncated_pixels, "unexpected end of pixel data");
  }
  std::vector<std::uint8_t> raster(bytes.begin() + start, bytes.begin() + start + need);
  return RgbImage(static_cast<int>(width), static_cast<int>(height), std::move(raster));
}

std::vector<std::uint8_t> encode_dmap(const DeformationMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(kDmapHeaderSize + map.pixel_count() * 5);
  for (char c : {'D', 'M', 'A', 'P'}) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kDmapVersion);
  put_u32le(out, static_cast<std::uint32_t>(map.width()));
  put_u32le(out, static_cast<std::uint32_t>(map.height()));
  for (float d : map.depths()) put_u32le(out, std::bit_cast<std::uint32_t>(d));
  for (std::uint8_t m : map.mask()) out.push_back(m ? 1 : 0);
  return out;
}

DeformationMap decode_dmap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "DMAP", 4) != 0) {
    throw IoError(IoErrc::bad_magic, "bad magic");
  }
  if (bytes.size() < kDmapHeaderSize) {
    throw IoError(IoErrc::size_mismatch, "size mismatch: truncated header");
  }
  if (bytes[4] != kDmapVersion) {
    throw IoError(IoErrc::version_mismatch, "version mismatch: got " + std::to_string(bytes[4]) +
                                                ", expected " + std::to_string(kDmapVersion));
  }
  const std::uint32_t width = get_u32le(bytes.data() + 5);
  const std::uint32_t height = get_u32le(bytes.data() + 9);
  if (width == 0 || height == 0 || width > 1u << 16 || height > 1u << 16) {
    throw IoError(IoErrc::size_mismatch, "size mismatch: bad dimensions");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const std::size_t payload = bytes.size() - kDmapHeaderSize;
  if (payload < 4 * n) throw IoError(IoErrc::truncated_depths, "truncated depth payload");
  if (payload < 5 * n) throw IoError(IoErrc::truncated_mask, "truncated mask payload");
  if (payload > 5 * n) throw IoError(IoErrc::size_mismatch, "size mismatch: trailing bytes");

  std::vector<float> depths(n);
  const std::uint8_t* p = bytes.data() + kDmapHeaderSize;
  for (std::size_t i = 0; i < n; ++i, p += 4) depths[i] = std::bit_cast<float>(get_u32le(p));
  std::vector<std::uint8_t> mask(p, p + n);
  for (auto m : mask) {
    if (m > 1) throw IoError(IoErrc::size_mismatch, "size mismatch: mask byte is not 0/1");
  }
  return DeformationMap(static_cast<int>(width), static_cast<int>(height), std::move(depths),
                        std::move(mask));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoErrc::open_failed, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoErrc::open_failed, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(IoErrc::open_failed, "write failed for " + path.string());
}

void save_ppm(const std::filesystem::path& path, const RgbImage& img) {
  write_file_bytes(path, encode_ppm(img));
}

RgbImage load_ppm(const std::filesystem::path& path) { return decode_ppm(read_file_bytes(path)); }

void save_dmap(const std::filesystem::path& path, const DeformationMap& map) {
  write_file_bytes(path, encode_dmap(map));
}

DeformationMap load_dmap(const std::filesystem::path& path) {
  return decode_dmap(read_file_bytes(path));
}

}  // namespace palpa
