#include "bevnav/grid.hpp"

#include <cstring>
#include <fstream>

namespace bevnav {

namespace {

constexpr char kMagic[8] = {'B', 'V', 'M', 'A', 'P', '0', '0', '1'};
constexpr size_t kHeaderSize = 32;

}  // namespace

void save_bevmap(const BevMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_bevmap: cannot open " + path);

  unsigned char header[kHeaderSize] = {0};
  std::memcpy(header, kMagic, sizeof(kMagic));
  const uint32_t rows = static_cast<uint32_t>(map.spec.rows());
  const uint32_t cols = static_cast<uint32_t>(map.spec.cols());
  const uint32_t channels = static_cast<uint32_t>(map.channels);
  std::memcpy(header + 8, &rows, 4);
  std::memcpy(header + 12, &cols, 4);
  std::memcpy(header + 16, &channels, 4);
  const float cell = static_cast<float>(map.spec.cell);
  std::memcpy(header + 20, &cell, 4);
  out.write(reinterpret_cast<const char*>(header), kHeaderSize);
  out.write(reinterpret_cast<const char*>(map.data.data()),
            static_cast<std::streamsize>(map.data.size() * sizeof(float)));
  if (!out) throw std::runtime_error("save_bevmap: write failed for " + path);
}

BevMap load_bevmap(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_bevmap: cannot open " + path);

  unsigned char header[kHeaderSize];
  in.read(reinterpret_cast<char*>(header), kHeaderSize);
  if (!in || std::memcmp(header, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("load_bevmap: bad header in " + path);
  }
  uint32_t rows, cols, channels;
  float cell;
  std::memcpy(&rows, header + 8, 4);
  std::memcpy(&cols, header + 12, 4);
  std::memcpy(&channels, header + 16, 4);
  std::memcpy(&cell, header + 20, 4);
  if (rows == 0 || cols == 0 || channels == 0 || rows != cols) {
    throw std::runtime_error("load_bevmap: bad dimensions in " + path);
  }

  GridSpec spec;
  spec.cell = static_cast<double>(cell);
  spec.bound = 0.5 * rows * spec.cell;
  BevMap map(spec, static_cast<int>(channels));
  in.read(reinterpret_cast<char*>(map.data.data()),
          static_cast<std::streamsize>(map.data.size() * sizeof(float)));
  if (!in) throw std::runtime_error("load_bevmap: truncated payload in " + path);
  return map;
}

}  // namespace bevnav
