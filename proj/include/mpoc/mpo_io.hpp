#pragma once

// Binary MPO container.
//
//   "MPOC" | u32 version | u64 n | f64 log_norm | i64 center (-1 = none)
//   n x (u64 left, u64 out, u64 in, u64 right)
//   entries of every site in order, row-major, as (f64 re, f64 im)
//
// Little-endian host byte order. Round trips are bit-exact.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mpoc/mpo.hpp"

namespace mpoc {

inline constexpr std::uint32_t kMpoFormatVersion = 1;

void write_mpo(std::ostream& os, const Mpo& mpo);
Mpo read_mpo(std::istream& is);

void save_mpo(const std::string& path, const Mpo& mpo);
Mpo load_mpo(const std::string& path);

}  // namespace mpoc
