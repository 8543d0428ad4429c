#pragma once

// Little-endian fixed-width helpers for checkpoint files.

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dacemad::io {

static_assert(std::endian::native == std::endian::little,
              "checkpoint files are written in host byte order, which must be little-endian");

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_f64s(std::ostream& out, std::span<const double> v);
void write_string(std::ostream& out, std::string_view s);
void write_magic(std::ostream& out, std::string_view magic);

std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
void read_f64s(std::istream& in, std::span<double> v);
std::string read_string(std::istream& in);
void expect_magic(std::istream& in, std::string_view magic);

}  // namespace dacemad::io
