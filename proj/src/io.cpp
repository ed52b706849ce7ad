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

#include "dgsf/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dgsf/errors.hpp"

namespace dgsf::io {

void ByteWriter::u32(uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<uint32_t>(v)); }

void ByteReader::expect_magic(std::string_view magic) {
  if (take(magic.size()) != magic) throw InputError(what_ + ": bad magic header");
}

std::string_view ByteReader::take(size_t n) {
  if (remaining() < n) throw InputError(what_ + ": truncated");
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

uint8_t ByteReader::u8() { return static_cast<uint8_t>(take(1)[0]); }

uint32_t ByteReader::u32() {
  const std::string_view b = take(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(b[i])) << (8 * i);
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

void ByteReader::expect_end() const {
  if (pos_ != data_.size()) throw InputError(what_ + ": trailing bytes");
}

std::string encode_cloud(const RawCloud& cloud) {
  ByteWriter w;
  w.bytes(kCloudMagic);
  w.u32(static_cast<uint32_t>(cloud.points.size()));
  for (const Vec3f& p : cloud.points)
    for (float c : p) w.f32(c);
  return w.data();
}

RawCloud decode_cloud(std::string_view bytes) {
  ByteReader r(bytes, "cloud file");
  r.expect_magic(kCloudMagic);
  const uint32_t n = r.u32();
  if (r.remaining() != static_cast<size_t>(n) * 12) throw InputError("cloud file: size does not match point count");
  RawCloud cloud;
  cloud.points.resize(n);
  for (Vec3f& p : cloud.points)
    for (float& c : p) c = r.f32();
  r.expect_end();
  return cloud;
}

std::string encode_grid(const CellGrid<3>& grid) {
  ByteWriter w;
  w.bytes(kGridMagic);
  w.u32(static_cast<uint32_t>(grid.height));
  w.u32(static_cast<uint32_t>(grid.width));
  for (float v : grid.values) w.f32(v);
  for (uint8_t b : grid.valid) w.u8(b);
  return w.data();
}

CellGrid<3> decode_grid(std::string_view bytes) {
  ByteReader r(bytes, "grid file");
  r.expect_magic(kGridMagic);
  const uint32_t h = r.u32();
  const uint32_t w = r.u32();
  const uint64_t cells = static_cast<uint64_t>(h) * w;
  if (h > (1u << 16) || w > (1u << 16) || r.remaining() != cells * 13)
    throw InputError("grid file: size does not match header");
  CellGrid<3> grid(static_cast<int>(h), static_cast<int>(w));
  for (float& v : grid.values) v = r.f32();
  for (uint8_t& b : grid.valid) {
    b = r.u8();
    if (b > 1) throw InputError("grid file: validity byte is not 0 or 1");
  }
  r.expect_end();
  return grid;
}

std::string encode_image(const RgbImage& img) {
  ByteWriter w;
  w.bytes(kImageMagic);
  w.u32(static_cast<uint32_t>(img.height));
  w.u32(static_cast<uint32_t>(img.width));
  for (float v : img.rgb) w.f32(v);
  return w.data();
}

RgbImage decode_image(std::string_view bytes) {
  ByteReader r(bytes, "image file");
  r.expect_magic(kImageMagic);
  const uint32_t h = r.u32();
  const uint32_t w = r.u32();
  const uint64_t cells = static_cast<uint64_t>(h) * w;
  if (h > (1u << 16) || w > (1u << 16) || r.remaining() != cells * 12)
    throw InputError("image file: size does not match header");
  RgbImage img{static_cast<int>(h), static_cast<int>(w), std::vector<float>(cells * 3)};
  for (float& v : img.rgb) v = r.f32();
  r.expect_end();
  return img;
}

std::string encode_intrinsics(const CameraIntrinsics& intr) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "fx=" << intr.fx << "\nfy=" << intr.fy << "\ncx=" << intr.cx << "\ncy=" << intr.cy << "\nwidth=" << intr.width
     << "\nheight=" << intr.height << "\n";
  return os.str();
}

namespace {

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InputError("'" + key + "': not a number: " + s);
  return v;
}

int parse_int(const std::string& key, const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("'" + key + "': not an integer: " + s);
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
  std::map<std::string, std::string> out;
  size_t line_no = 0;
  while (!text.empty()) {
    const size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) throw InputError("line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw InputError("line " + std::to_string(line_no) + ": empty key");
    if (out.count(key)) throw InputError("duplicate key '" + key + "'");
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

CameraIntrinsics decode_intrinsics(std::string_view text) {
  auto kv = parse_key_values(text);
  auto need = [&](const char* key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw InputError(std::string("intrinsics: missing key '") + key + "'");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  CameraIntrinsics intr;
  intr.fx = parse_double("fx", need("fx"));
  intr.fy = parse_double("fy", need("fy"));
  intr.cx = parse_double("cx", need("cx"));
  intr.cy = parse_double("cy", need("cy"));
  intr.width = parse_int("width", need("width"));
  intr.height = parse_int("height", need("height"));
  if (!kv.empty()) throw InputError("intrinsics: unknown key '" + kv.begin()->first + "'");
  intr.validate();
  return intr;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace dgsf::io
