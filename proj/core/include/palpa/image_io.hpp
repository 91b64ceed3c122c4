#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "palpa/image.hpp"

namespace palpa {

enum class IoErrc {
  open_failed,
  malformed_header,
  unsupported_maxval,
  truncated_pixels,
  bad_magic,
  version_mismatch,
  truncated_depths,
  truncated_mask,
  size_mismatch,
};

class IoError : public std::runtime_error {
 public:
  IoError(IoErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  IoErrc code() const { return code_; }

 private:
  IoErrc code_;
};

/// Binary PPM (P6, maxval 255).
std::vector<std::uint8_t> encode_ppm(const RgbImage& img);
RgbImage decode_ppm(std::span<const std::uint8_t> bytes);
void save_ppm(const std::filesystem::path& path, const RgbImage& img);
RgbImage load_ppm(const std::filesystem::path& path);

inline constexpr std::uint8_t kDmapVersion = 1;

/// "DMAP", version byte, u32le width, u32le height, f32le depths, u8 mask.
std::vector<std::uint8_t> encode_dmap(const DeformationMap& map);
DeformationMap decode_dmap(std::span<const std::uint8_t> bytes);
void save_dmap(const std::filesystem::path& path, const DeformationMap& map);
DeformationMap load_dmap(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace palpa
