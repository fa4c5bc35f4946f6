#include "fame/matrix_file.hpp"

#include "fame/byte_io.hpp"

#include <fstream>
#include <limits>

namespace fame::byte_io {

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<char>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace fame::byte_io

namespace fame::io {
namespace {

constexpr char kMagic[8] = {'F', 'A', 'M', 'E', '-', 'M', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t checked_dim(Eigen::Index n) {
  if (n < 0 || n > std::numeric_limits<std::uint32_t>::max())
    throw Error("FAME-MAT: dimension out of range");
  return static_cast<std::uint32_t>(n);
}

void put_header(std::vector<char>& out, std::uint32_t tag, std::uint32_t rows, std::uint32_t cols) {
  out.insert(out.end(), kMagic, kMagic + 8);
  byte_io::put<std::uint32_t>(out, kVersion);
  byte_io::put<std::uint32_t>(out, tag);
  byte_io::put<std::uint32_t>(out, rows);
  byte_io::put<std::uint32_t>(out, cols);
}

void put_value(std::vector<char>& out, DType dtype, double v) {
  switch (dtype) {
    case DType::f32:
      byte_io::put<float>(out, static_cast<float>(v));
      break;
    case DType::f64:
      byte_io::put<double>(out, v);
      break;
    case DType::u32:
      if (!(v >= 0.0 && v <= 4294967295.0) || v != static_cast<double>(static_cast<std::uint32_t>(v)))
        throw Error("FAME-MAT: value " + std::to_string(v) + " is not representable as u32");
      byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(v));
      break;
  }
}

double get_value(byte_io::Reader& in, DType dtype) {
  switch (dtype) {
    case DType::f32:
      return in.get<float>();
    case DType::f64:
      return in.get<double>();
    case DType::u32:
      return in.get<std::uint32_t>();
  }
  return 0.0;
}

std::size_t value_size(DType dtype) { return dtype == DType::f64 ? 8 : 4; }

MatrixHeader read_header(byte_io::Reader& in) {
  if (in.get_string(8) != std::string(kMagic, 8)) throw Error("FAME-MAT: bad magic");
  const auto version = in.get<std::uint32_t>();
  if (version != kVersion) throw Error("FAME-MAT: unsupported version " + std::to_string(version));
  const auto tag = in.get<std::uint32_t>();
  MatrixHeader h;
  h.sparse = (tag & kSparseFlag) != 0;
  const auto base = tag & ~kSparseFlag;
  if (base < 1 || base > 3) throw Error("FAME-MAT: unknown dtype tag " + std::to_string(tag));
  h.dtype = static_cast<DType>(base);
  h.rows = in.get<std::uint32_t>();
  h.cols = in.get<std::uint32_t>();
  return h;
}

// Calls sink(row, col, value) for every stored entry.
template <class Sink>
MatrixHeader decode_entries(const std::vector<char>& bytes, Sink&& sink) {
  byte_io::Reader in(bytes, "FAME-MAT");
  const MatrixHeader h = read_header(in);
  if (!h.sparse) {
    const std::size_t count = static_cast<std::size_t>(h.rows) * h.cols;
    if (in.remaining() != count * value_size(h.dtype))
      throw Error("FAME-MAT: shape " + std::to_string(h.rows) + "x" + std::to_string(h.cols) +
                  " does not match payload of " + std::to_string(in.remaining()) + " bytes");
    for (std::uint32_t r = 0; r < h.rows; ++r)
      for (std::uint32_t c = 0; c < h.cols; ++c) sink(r, c, get_value(in, h.dtype));
  } else {
    const auto nnz = in.get<std::uint32_t>();
    if (in.remaining() != static_cast<std::size_t>(nnz) * (8 + value_size(h.dtype)))
      throw Error("FAME-MAT: sparse payload length does not match nnz " + std::to_string(nnz));
    for (std::uint32_t i = 0; i < nnz; ++i) {
      const auto r = in.get<std::uint32_t>();
      const auto c = in.get<std::uint32_t>();
      if (r >= h.rows || c >= h.cols) throw Error("FAME-MAT: sparse entry out of bounds");
      sink(r, c, get_value(in, h.dtype));
    }
  }
  return h;
}

}  // namespace

std::vector<char> encode_matrix(const Matrix& m, DType dtype) {
  std::vector<char> out;
  const auto rows = checked_dim(m.rows());
  const auto cols = checked_dim(m.cols());
  out.reserve(24 + static_cast<std::size_t>(rows) * cols * value_size(dtype));
  put_header(out, static_cast<std::uint32_t>(dtype), rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_value(out, dtype, m(r, c));
  return out;
}

std::vector<char> encode_counts(const CountMatrix& m) {
  std::vector<char> out;
  put_header(out, static_cast<std::uint32_t>(DType::u32) | kSparseFlag, checked_dim(m.rows()),
             checked_dim(m.cols()));
  std::uint32_t nnz = 0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (CountMatrix::InnerIterator it(m, r); it; ++it)
      if (it.value() != 0.0) ++nnz;
  byte_io::put<std::uint32_t>(out, nnz);
  for (Eigen::Index r = 0; r < m.outerSize(); ++r)
    for (CountMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.value() == 0.0) continue;
      byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(r));
      byte_io::put<std::uint32_t>(out, static_cast<std::uint32_t>(it.col()));
      put_value(out, DType::u32, it.value());
    }
  return out;
}

Matrix decode_matrix(const std::vector<char>& bytes, MatrixHeader* header) {
  byte_io::Reader probe(bytes, "FAME-MAT");
  const MatrixHeader h = read_header(probe);
  Matrix m = Matrix::Zero(h.rows, h.cols);
  decode_entries(bytes, [&](std::uint32_t r, std::uint32_t c, double v) { m(r, c) = v; });
  if (header) *header = h;
  return m;
}

CountMatrix decode_sparse(const std::vector<char>& bytes, MatrixHeader* header) {
  std::vector<Eigen::Triplet<double>> triplets;
  const MatrixHeader h = decode_entries(bytes, [&](std::uint32_t r, std::uint32_t c, double v) {
    if (v != 0.0) triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  });
  CountMatrix m(h.rows, h.cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  if (header) *header = h;
  return m;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m, DType dtype) {
  byte_io::write_file(path.string(), encode_matrix(m, dtype));
}

Matrix read_matrix(const std::filesystem::path& path) {
  try {
    return decode_matrix(byte_io::read_file(path.string()));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_counts(const std::filesystem::path& path, const CountMatrix& m) {
  byte_io::write_file(path.string(), encode_counts(m));
}

CountMatrix read_counts(const std::filesystem::path& path) {
  try {
    return decode_sparse(byte_io::read_file(path.string()));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_u32(const std::filesystem::path& path, const std::vector<std::uint32_t>& values,
               std::uint32_t rows, std::uint32_t cols) {
  if (static_cast<std::size_t>(rows) * cols != values.size())
    throw Error("FAME-MAT: shape does not match value count");
  std::vector<char> out;
  put_header(out, static_cast<std::uint32_t>(DType::u32), rows, cols);
  for (auto v : values) byte_io::put<std::uint32_t>(out, v);
  byte_io::write_file(path.string(), out);
}

std::vector<std::uint32_t> read_u32(const std::filesystem::path& path, std::uint32_t* rows,
                                    std::uint32_t* cols) {
  const auto bytes = byte_io::read_file(path.string());
  std::vector<std::uint32_t> values;
  MatrixHeader h;
  try {
    byte_io::Reader probe(bytes, "FAME-MAT");
    h = read_header(probe);
    if (h.dtype != DType::u32 || h.sparse) throw Error("FAME-MAT: expected dense u32 matrix");
    values.assign(static_cast<std::size_t>(h.rows) * h.cols, 0);
    decode_entries(bytes, [&](std::uint32_t r, std::uint32_t c, double v) {
      values[static_cast<std::size_t>(r) * h.cols + c] = static_cast<std::uint32_t>(v);
    });
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
  if (rows) *rows = h.rows;
  if (cols) *cols = h.cols;
  return values;
}

}  // namespace fame::io
