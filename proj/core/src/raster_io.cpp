/*
 * Copyright 2026 The bhest Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>

#include "bh/error.hpp"
#include "bh/raster.hpp"

namespace bh {

namespace {

constexpr std::uint8_t kMagic[4] = {'B', 'H', 'G', 'R'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 4 + 8 + 8 + 8 + 4;

template <class U>
void put_le(std::vector<std::uint8_t>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class U>
  U get_le(const char* field) {
    if (bytes_.size() - pos_ < sizeof(U)) {
      throw FormatError(std::string("truncated file while reading ") + field, pos_);
    }
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<U>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(U);
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_raster(const RasterGrid& grid) {
  const GridGeometry& g = grid.geometry();
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * grid.size());
  for (std::uint8_t b : kMagic) out.push_back(b);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.rows));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.cols));
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(g.origin_x));
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(g.origin_y));
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(g.pixel_size));
  put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(grid.nodata()));
  for (float v : grid.values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

RasterGrid decode_raster(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad magic, expected \"BHGR\"", 0);
  }
  Reader rd(bytes.subspan(0));
  rd.get_le<std::uint32_t>("magic");
  const std::size_t version_at = rd.pos();
  const auto version = rd.get_le<std::uint16_t>("version");
  if (version != kVersion) {
    throw FormatError("unsupported BHGR version " + std::to_string(version),
                      version_at);
  }
  GridGeometry g;
  const std::size_t dims_at = rd.pos();
  g.rows = rd.get_le<std::uint32_t>("rows");
  g.cols = rd.get_le<std::uint32_t>("cols");
  g.origin_x = std::bit_cast<double>(rd.get_le<std::uint64_t>("origin_x"));
  g.origin_y = std::bit_cast<double>(rd.get_le<std::uint64_t>("origin_y"));
  const std::size_t ps_at = rd.pos();
  g.pixel_size = std::bit_cast<double>(rd.get_le<std::uint64_t>("pixel_size"));
  const float nodata = std::bit_cast<float>(rd.get_le<std::uint32_t>("nodata"));
  if (g.rows == 0 || g.cols == 0) throw FormatError("empty grid dimensions", dims_at);
  if (!(g.pixel_size > 0.0) || !std::isfinite(g.pixel_size)) {
    throw FormatError("pixel_size must be positive", ps_at);
  }
  const std::uint64_t n = static_cast<std::uint64_t>(g.rows) * g.cols;
  if (rd.remaining() < n * 4) {
    throw FormatError("truncated pixel data: expected " + std::to_string(n * 4) +
                          " bytes, found " + std::to_string(rd.remaining()),
                      bytes.size());
  }
  if (rd.remaining() > n * 4) {
    throw FormatError("trailing bytes after pixel data", rd.pos() + n * 4);
  }
  std::vector<float> values(n);
  for (auto& v : values) v = std::bit_cast<float>(rd.get_le<std::uint32_t>("pixel"));
  RasterGrid grid(g, nodata, std::move(values));
  grid.validate();
  return grid;
}

RasterGrid read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open raster " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_raster(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_raster(const RasterGrid& grid, const std::filesystem::path& path) {
  grid.validate();
  const auto bytes = encode_raster(grid);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write raster " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

void dump_raster_csv(const RasterGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  const GridGeometry& g = grid.geometry();
  out << "row,col,x,y,value\n" << std::setprecision(10);
  for (std::size_t r = 0; r < g.rows; ++r) {
    for (std::size_t c = 0; c < g.cols; ++c) {
      const float v = grid.at(r, c);
      if (grid.is_nodata(v)) continue;
      out << r << ',' << c << ',' << g.center_x(c) << ',' << g.center_y(r) << ','
          << v << '\n';
    }
  }
}

}  // namespace bh
