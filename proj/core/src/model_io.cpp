#include "matnet/model_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "matnet/data.hpp"

namespace matnet {

namespace {

constexpr char kMagic[4] = {'M', 'A', 'T', 'N'};

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& what) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw ParseError("model file: truncated while reading " + what);
  }
  return std::uint32_t(buf[0]) | (std::uint32_t(buf[1]) << 8) |
         (std::uint32_t(buf[2]) << 16) | (std::uint32_t(buf[3]) << 24);
}

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
  }
}

void read_doubles(std::istream& in, std::vector<double>& values) {
  for (double& v : values) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) {
      throw ParseError("model file: truncated parameter payload");
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(buf[i]) << (8 * i);
    std::memcpy(&v, &bits, sizeof(v));
  }
}

}  // namespace

void save_model(const std::string& path, const std::vector<NamedParam>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValueError("cannot open '" + path + "' for writing");
  out.write(kMagic, 4);
  write_u32(out, kModelFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const NamedParam& p : params) {
    write_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32(out, static_cast<std::uint32_t>(p.value->rows()));
    write_u32(out, static_cast<std::uint32_t>(p.value->cols()));
    write_doubles(out, p.value->raw());
  }
  if (!out) throw ValueError("write failed for '" + path + "'");
}

std::vector<std::pair<std::string, Matrix>> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("model file: bad magic");
  }
  const std::uint32_t version = read_u32(in, "format version");
  if (version != kModelFormatVersion) {
    throw ParseError("model file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = read_u32(in, "block count");
  std::vector<std::pair<std::string, Matrix>> blocks;
  blocks.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(in, "name length");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) {
      throw ParseError("model file: truncated block name");
    }
    const std::uint32_t rows = read_u32(in, "rows");
    const std::uint32_t cols = read_u32(in, "cols");
    Matrix m(static_cast<int>(rows), static_cast<int>(cols));
    read_doubles(in, m.raw());
    blocks.emplace_back(std::move(name), std::move(m));
  }
  return blocks;
}

void restore_model(const std::string& path, const std::vector<NamedParam>& params) {
  auto blocks = load_model(path);
  if (blocks.size() != params.size()) {
    throw ParseError("model file has " + std::to_string(blocks.size()) +
                     " blocks, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (blocks[i].first != params[i].name) {
      throw ParseError("model file block '" + blocks[i].first + "' does not match '" +
                       params[i].name + "'");
    }
    if (!blocks[i].second.same_shape(*params[i].value)) {
      throw ParseError("model file block '" + blocks[i].first + "' has shape " +
                       blocks[i].second.shape_str() + ", expected " +
                       params[i].value->shape_str());
    }
    *params[i].value = std::move(blocks[i].second);
  }
}

}  // namespace matnet
