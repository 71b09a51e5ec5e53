#pragma once

#include "repsim/numeric.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace repsim::npy {

enum class DType { Float32, Float64, Int64 };

struct Header {
  DType dtype;
  std::vector<std::size_t> shape;
  std::size_t data_offset = 0;  // byte offset of the payload
};

/// Parses the magic, version and header dict of an NPY buffer. Accepts
/// versions 1.0 and 2.0, little-endian '<f4', '<f8', '<i8' only, and
/// requires fortran_order False. Everything else is a FormatError.
Header parse_header(std::span<const char> bytes);

/// Renders a version 1.0 header padded so the payload is 64-byte aligned.
std::string format_header(DType dtype, std::span<const std::size_t> shape);

/// Parses only the header and checks the payload size against the file
/// size; the data itself is not read.
Header read_header(const std::filesystem::path& path);

/// Reads a 2-D float32/float64 array as a double matrix. Float32 values are
/// promoted exactly. Non-2-D shapes raise ShapeMismatch.
Matrix read_matrix(const std::filesystem::path& path);

/// Reads a 1-D int64 array.
std::vector<std::int64_t> read_int64(const std::filesystem::path& path);

/// Writers go through a temporary file in the same directory and rename it
/// into place, so a reader never observes a partial file.
void write_matrix(const std::filesystem::path& path, const Matrix& m,
                  DType dtype = DType::Float64);
void write_int64(const std::filesystem::path& path, std::span<const std::int64_t> values);

}  // namespace repsim::npy
