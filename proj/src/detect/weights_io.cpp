#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "advreal/core/errors.hpp"
#include "advreal/detect/toy_detector.hpp"

// Weight fixture layout:
//   ADVREAL-WEIGHTS 1\n
//   tensors <count>\n
//   per tensor: "<name> <ndims> <dim>...\n" followed by prod(dims) little-endian float32 values and "\n".

namespace advreal::detect {
namespace {

constexpr const char* kMagic = "ADVREAL-WEIGHTS";

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

void write_tensor(std::ostream& out, const std::string& name, const std::vector<int>& dims,
                  const std::vector<double>& values) {
  out << name << ' ' << dims.size();
  for (int d : dims) out << ' ' << d;
  out << '\n';
  for (double v : values) {
    const auto f = static_cast<float>(v);
    const std::uint32_t le = to_little_endian(std::bit_cast<std::uint32_t>(f));
    out.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  out << '\n';
}

void read_tensor(std::istream& in, const std::string& name, const std::vector<int>& dims,
                 std::vector<double>& values) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("weights: truncated before tensor " + name);
  std::istringstream hs(header);
  std::string got;
  std::size_t nd = 0;
  hs >> got >> nd;
  if (got != name || nd != dims.size()) throw IoError("weights: expected tensor " + name + ", found '" + header + "'");
  for (int d : dims) {
    int gd = 0;
    hs >> gd;
    if (gd != d) throw IoError("weights: shape mismatch for " + name);
  }
  for (auto& v : values) {
    std::uint32_t le = 0;
    if (!in.read(reinterpret_cast<char*>(&le), sizeof le)) throw IoError("weights: truncated data in " + name);
    v = static_cast<double>(std::bit_cast<float>(to_little_endian(le)));
  }
  if (in.get() != '\n') throw IoError("weights: missing terminator after " + name);
}

}  // namespace

void ToyDetector::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto ls = layers();
  out << kMagic << " 1\n" << "tensors " << 2 * ls.size() << '\n';
  for (const Conv2d* l : ls) {
    write_tensor(out, l->name + ".weight", {l->out_ch, l->in_ch, l->kernel, l->kernel}, l->weight);
    write_tensor(out, l->name + ".bias", {l->out_ch}, l->bias);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ToyDetector ToyDetector::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open detector weights " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != std::string(kMagic) + " 1") throw IoError("weights: bad magic in " + path.string());
  std::getline(in, line);
  ToyDetector det;
  auto ls = det.layers();
  if (line != "tensors " + std::to_string(2 * ls.size())) throw IoError("weights: unexpected tensor count");
  for (Conv2d* l : ls) {
    read_tensor(in, l->name + ".weight", {l->out_ch, l->in_ch, l->kernel, l->kernel}, l->weight);
    read_tensor(in, l->name + ".bias", {l->out_ch}, l->bias);
  }
  return det;
}

}  // namespace advreal::detect
