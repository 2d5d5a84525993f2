#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "amphim/nn/mlp.hpp"

namespace amphim::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Little-endian binary writer for checkpoint files.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v);
  void boolean(bool v) { u32(v ? 1u : 0u); }
  void str(const std::string& s);
  void magic(const std::string& tag);
  void vec(const Eigen::VectorXd& v);
  void vec(const std::vector<double>& v);

 private:
  std::ostream& os_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& is) : is_(is) {}

  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64();
  bool boolean() { return u32() != 0; }
  std::string str();
  void expect_magic(const std::string& tag);
  Eigen::VectorXd vec();
  std::vector<double> std_vec();

 private:
  void read_bytes(void* dst, std::size_t n);
  std::istream& is_;
};

/// Network checkpoint: magic, format version, spec, then little-endian doubles.
void save_net(BinaryWriter& w, const nn::Mlp& net);
/// Loads a network; when `expected` is given the stored spec must match it.
nn::Mlp load_net(BinaryReader& r, const nn::NetSpec* expected = nullptr);

void save_net_file(const std::string& path, const nn::Mlp& net);
nn::Mlp load_net_file(const std::string& path, const nn::NetSpec* expected = nullptr);

}  // namespace amphim::io
