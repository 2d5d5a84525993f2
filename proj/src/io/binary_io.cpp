#include "amphim/io/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace amphim::io {
namespace {

constexpr std::uint32_t kNetFormatVersion = 1;
constexpr char kNetMagic[] = "AMPHNET";

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

}  // namespace

void BinaryWriter::u32(std::uint32_t v) {
  v = to_little(v);
  os_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::u64(std::uint64_t v) {
  v = to_little(v);
  os_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  os_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::magic(const std::string& tag) { os_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

void BinaryWriter::vec(const Eigen::VectorXd& v) {
  u64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
}

void BinaryWriter::vec(const std::vector<double>& v) {
  u64(v.size());
  for (double x : v) f64(x);
}

void BinaryReader::read_bytes(void* dst, std::size_t n) {
  is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is_.gcount()) != n) throw FormatError("unexpected end of file");
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v;
  read_bytes(&v, sizeof v);
  return to_little(v);
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v;
  read_bytes(&v, sizeof v);
  return to_little(v);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const std::uint64_t n = u64();
  if (n > (1u << 30)) throw FormatError("string length out of range");
  std::string s(n, '\0');
  read_bytes(s.data(), n);
  return s;
}

void BinaryReader::expect_magic(const std::string& tag) {
  std::string got(tag.size(), '\0');
  read_bytes(got.data(), got.size());
  if (got != tag) throw FormatError("bad magic: expected '" + tag + "'");
}

Eigen::VectorXd BinaryReader::vec() {
  const std::uint64_t n = u64();
  if (n > (1ull << 32)) throw FormatError("vector length out of range");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
  return v;
}

std::vector<double> BinaryReader::std_vec() {
  Eigen::VectorXd v = vec();
  return {v.data(), v.data() + v.size()};
}

void save_net(BinaryWriter& w, const nn::Mlp& net) {
  w.magic(kNetMagic);
  w.u32(kNetFormatVersion);
  const auto& spec = net.spec();
  w.u32(static_cast<std::uint32_t>(spec.widths.size()));
  for (int width : spec.widths) w.u32(static_cast<std::uint32_t>(width));
  w.u32(static_cast<std::uint32_t>(spec.hidden));
  w.u32(static_cast<std::uint32_t>(spec.output));
  w.vec(net.params());
}

nn::Mlp load_net(BinaryReader& r, const nn::NetSpec* expected) {
  r.expect_magic(kNetMagic);
  const std::uint32_t version = r.u32();
  if (version != kNetFormatVersion) throw FormatError("unsupported net format version " + std::to_string(version));
  nn::NetSpec spec;
  const std::uint32_t n = r.u32();
  if (n < 2 || n > 64) throw FormatError("bad layer count");
  for (std::uint32_t i = 0; i < n; ++i) spec.widths.push_back(static_cast<int>(r.u32()));
  const std::uint32_t hidden = r.u32(), output = r.u32();
  if (hidden > 2 || output > 2) throw FormatError("bad activation code");
  spec.hidden = static_cast<nn::Activation>(hidden);
  spec.output = static_cast<nn::Activation>(output);
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  if (expected && !(spec == *expected)) throw FormatError("network shape does not match the expected spec");
  nn::Mlp net(spec);
  Eigen::VectorXd p = r.vec();
  if (p.size() != net.params().size()) throw FormatError("parameter count does not match spec");
  if (!p.allFinite()) throw FormatError("non-finite parameters");
  net.params() = std::move(p);
  return net;
}

void save_net_file(const std::string& path, const nn::Mlp& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  BinaryWriter w(os);
  save_net(w, net);
  if (!os) throw std::runtime_error("write failed: '" + path + "'");
}

nn::Mlp load_net_file(const std::string& path, const nn::NetSpec* expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  BinaryReader r(is);
  return load_net(r, expected);
}

}  // namespace amphim::io
