#include "mpoc/mpo_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "mpoc/errors.hpp"

namespace mpoc {

namespace {

constexpr std::array<char, 4> kMagic{'M', 'P', 'O', 'C'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FileError("truncated MPO file");
  return v;
}

}  // namespace

void write_mpo(std::ostream& os, const Mpo& mpo) {
  mpo.validate();
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kMpoFormatVersion);
  put<std::uint64_t>(os, mpo.size());
  put<double>(os, mpo.log_norm);
  put<std::int64_t>(os, mpo.center ? static_cast<std::int64_t>(*mpo.center) : -1);
  for (const Tensor& t : mpo.sites)
    for (std::size_t e : t.shape()) put<std::uint64_t>(os, e);
  for (const Tensor& t : mpo.sites) {
    for (const cplx& z : t.data()) {
      put<double>(os, z.real());
      put<double>(os, z.imag());
    }
  }
  if (!os) throw FileError("failed writing MPO");
}

Mpo read_mpo(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FileError("not an MPO file (bad magic)");
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kMpoFormatVersion) {
    throw FileError("unsupported MPO format version " + std::to_string(version));
  }
  const auto n = get<std::uint64_t>(is);
  if (n == 0 || n > 100000) throw FileError("implausible MPO site count " + std::to_string(n));
  Mpo mpo;
  mpo.log_norm = get<double>(is);
  const auto center = get<std::int64_t>(is);
  if (center >= 0) mpo.center = static_cast<std::size_t>(center);
  std::vector<Shape> shapes(n, Shape(4));
  for (Shape& s : shapes) {
    for (std::size_t& e : s) {
      e = get<std::uint64_t>(is);
      if (e == 0 || e > 65536) throw FileError("implausible MPO extent");
    }
  }
  for (Shape& s : shapes) {
    std::vector<cplx> data(shape_volume(s));
    for (cplx& z : data) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      z = {re, im};
    }
    mpo.sites.emplace_back(std::move(s), std::move(data));
  }
  try {
    mpo.validate();
  } catch (const DimensionError& e) {
    throw FileError(std::string("inconsistent MPO file: ") + e.what());
  }
  return mpo;
}

void save_mpo(const std::string& path, const Mpo& mpo) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FileError("cannot open " + path + " for writing");
  write_mpo(os, mpo);
}

Mpo load_mpo(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FileError("cannot open " + path);
  return read_mpo(is);
}

}  // namespace mpoc
