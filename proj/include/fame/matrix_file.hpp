#pragma once

#include "fame/common.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

// FAME-MAT persistence used by every stage.
//
//   "FAME-MAT" | u32 version=1 | u32 dtype | u32 rows | u32 cols | payload
//
// dtype low byte: 1 = f32, 2 = f64, 3 = u32. Bit 8 (0x100) marks the sparse
// variant, whose payload is u32 nnz followed by nnz (u32 row, u32 col, value)
// entries in row-major order. The dense payload is rows*cols values, row-major.
// Everything is little-endian.
namespace fame::io {

enum class DType : std::uint32_t { f32 = 1, f64 = 2, u32 = 3 };
constexpr std::uint32_t kSparseFlag = 0x100;

struct MatrixHeader {
  DType dtype = DType::f64;
  bool sparse = false;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

std::vector<char> encode_matrix(const Matrix& m, DType dtype = DType::f64);
std::vector<char> encode_counts(const CountMatrix& m);

/// Decodes any dtype (dense or sparse) to a dense double matrix.
Matrix decode_matrix(const std::vector<char>& bytes, MatrixHeader* header = nullptr);
/// Decodes any dtype to a sparse matrix.
CountMatrix decode_sparse(const std::vector<char>& bytes, MatrixHeader* header = nullptr);

void write_matrix(const std::filesystem::path& path, const Matrix& m, DType dtype = DType::f64);
Matrix read_matrix(const std::filesystem::path& path);
void write_counts(const std::filesystem::path& path, const CountMatrix& m);
CountMatrix read_counts(const std::filesystem::path& path);

/// Integer vectors (assignments, count tables) stored as u32 matrices.
void write_u32(const std::filesystem::path& path, const std::vector<std::uint32_t>& values,
               std::uint32_t rows, std::uint32_t cols);
std::vector<std::uint32_t> read_u32(const std::filesystem::path& path, std::uint32_t* rows = nullptr,
                                    std::uint32_t* cols = nullptr);

}  // namespace fame::io
