#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mast/tensor.hpp"

namespace mast {

// Binary tensor file layout, all integers little-endian:
//   "MSTT" | u32 version (=1) | u32 rank | rank x u32 extents | f32 payload
inline constexpr char kTensorMagic[4] = {'M', 'S', 'T', 'T'};
inline constexpr std::uint32_t kTensorFormatVersion = 1;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mast
