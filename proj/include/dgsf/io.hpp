// Copyright 2026 The dgsf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Little-endian binary and key=value text formats used by the CLI.
//
//   cloud:      "DGSF_CLOUD_V1\0\0\0", u32 N, N x 3 f32
//   grid:       "DGSF_GRID_V1\0\0\0\0", u32 H, u32 W, H*W*3 f32, H*W u8 validity
//   image:      "DGSF_IMG_V1\0\0\0\0\0", u32 H, u32 W, H*W*3 f32 RGB in [0,1]
//   intrinsics: text lines fx=, fy=, cx=, cy=, width=, height=
//
// Readers throw InputError on bad magic, truncation or trailing bytes.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dgsf/grid.hpp"

namespace dgsf {

struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<float> rgb;  // H*W*3, row-major
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

namespace io {

inline constexpr std::string_view kCloudMagic{"DGSF_CLOUD_V1\0\0\0", 16};
inline constexpr std::string_view kGridMagic{"DGSF_GRID_V1\0\0\0\0", 16};
inline constexpr std::string_view kImageMagic{"DGSF_IMG_V1\0\0\0\0\0", 16};
inline constexpr std::string_view kWeightsMagic{"DGSF_WTS_V1\0\0\0\0\0", 16};

// Append-only little-endian encoder.
class ByteWriter {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v);
  void f32(float v);
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  ByteReader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}
  void expect_magic(std::string_view magic);
  uint8_t u8();
  uint32_t u32();
  float f32();
  std::string_view take(size_t n);
  void expect_end() const;
  size_t remaining() const { return data_.size() - pos_; }

 private:
  std::string_view data_;
  size_t pos_ = 0;
  std::string what_;
};

std::string encode_cloud(const RawCloud& cloud);
RawCloud decode_cloud(std::string_view bytes);

std::string encode_grid(const CellGrid<3>& grid);
CellGrid<3> decode_grid(std::string_view bytes);

std::string encode_image(const RgbImage& img);
RgbImage decode_image(std::string_view bytes);

std::string encode_intrinsics(const CameraIntrinsics& intr);
CameraIntrinsics decode_intrinsics(std::string_view text);

// Parses `key=value` lines; '#' starts a comment, blank lines are skipped.
std::map<std::string, std::string> parse_key_values(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace io
}  // namespace dgsf
