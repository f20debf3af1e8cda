#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "carkit/array.hpp"
#include "carkit/error.hpp"

// Reader/writer for the `.npy` v1.0 container, implemented from its byte
// layout: 6 magic bytes "\x93NUMPY", one byte each for major/minor version,
// a little-endian uint16 header length, then a Python dict literal
//   {'descr': '<f8', 'fortran_order': False, 'shape': (3, 2), }
// padded with spaces and terminated by '\n' so the payload starts on a
// 64-byte boundary. Payload is raw little-endian C-order data.
//
// Supported dtypes: '<f8' (64-bit float) and '|b1' (8-bit boolean).

namespace carkit {

static_assert(std::endian::native == std::endian::little,
              "npy reader/writer assumes a little-endian host");

enum class NpyDtype { Float64, Bool };

struct NpyArray {
  NpyDtype dtype = NpyDtype::Float64;
  std::vector<std::size_t> shape;
  std::vector<double> f64;     // valid when dtype == Float64
  std::vector<std::uint8_t> b8;  // valid when dtype == Bool

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto s : shape) n *= s;
    return shape.empty() ? 0 : n;
  }
};

namespace detail {

inline std::string npy_header(const char* descr, const std::vector<std::size_t>& shape) {
  std::ostringstream dict;
  dict << "{'descr': '" << descr << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  std::string header = dict.str();
  const std::size_t unpadded = 10 + header.size() + 1;  // prelude + dict + '\n'
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  header.append(padded - unpadded, ' ');
  header.push_back('\n');
  return header;
}

inline void write_npy_bytes(std::ostream& os, const char* descr,
                            const std::vector<std::size_t>& shape, const void* data,
                            std::size_t n_bytes) {
  const std::string header = npy_header(descr, shape);
  const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
  os.write("\x93NUMPY\x01\x00", 8);
  os.put(static_cast<char>(hlen & 0xFF));
  os.put(static_cast<char>(hlen >> 8));
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n_bytes));
  if (!os) throw Error(ErrorKind::IoError, "npy write failed");
}

// Minimal scanner for the header dict. Values are in numpy's own repr format,
// so exact key/token matching is enough.
inline std::string dict_value(const std::string& dict, const std::string& key) {
  const std::string quoted = "'" + key + "'";
  const std::size_t at = dict.find(quoted);
  if (at == std::string::npos)
    throw Error(ErrorKind::BadMagic, "npy header missing key " + quoted);
  std::size_t pos = dict.find(':', at + quoted.size());
  if (pos == std::string::npos) throw Error(ErrorKind::BadMagic, "malformed npy header");
  ++pos;
  while (pos < dict.size() && dict[pos] == ' ') ++pos;
  std::size_t end;
  if (dict[pos] == '\'') {
    end = dict.find('\'', pos + 1);
    if (end == std::string::npos) throw Error(ErrorKind::BadMagic, "malformed npy header");
    return dict.substr(pos + 1, end - pos - 1);
  }
  if (dict[pos] == '(') {
    end = dict.find(')', pos);
    if (end == std::string::npos) throw Error(ErrorKind::BadMagic, "malformed npy header");
    return dict.substr(pos, end - pos + 1);
  }
  end = dict.find_first_of(",}", pos);
  if (end == std::string::npos) throw Error(ErrorKind::BadMagic, "malformed npy header");
  std::string v = dict.substr(pos, end - pos);
  while (!v.empty() && v.back() == ' ') v.pop_back();
  return v;
}

inline std::vector<std::size_t> parse_shape(const std::string& tuple) {
  std::vector<std::size_t> shape;
  std::size_t pos = 1;  // skip '('
  while (pos < tuple.size() && tuple[pos] != ')') {
    while (pos < tuple.size() && (tuple[pos] == ' ' || tuple[pos] == ',')) ++pos;
    if (pos >= tuple.size() || tuple[pos] == ')') break;
    std::size_t digits = 0;
    std::size_t v = 0;
    while (pos < tuple.size() && tuple[pos] >= '0' && tuple[pos] <= '9') {
      v = v * 10 + static_cast<std::size_t>(tuple[pos] - '0');
      ++pos;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorKind::BadMagic, "malformed npy shape tuple");
    shape.push_back(v);
  }
  return shape;
}

}  // namespace detail

inline NpyArray read_npy(std::istream& is) {
  char prelude[8];
  is.read(prelude, 8);
  if (!is || std::memcmp(prelude, "\x93NUMPY", 6) != 0)
    throw Error(ErrorKind::BadMagic, "not an npy file");
  if (prelude[6] != 1 || prelude[7] != 0)
    throw Error(ErrorKind::BadMagic, "unsupported npy format version (need 1.0)");
  unsigned char len_bytes[2];
  is.read(reinterpret_cast<char*>(len_bytes), 2);
  if (!is) throw Error(ErrorKind::BadMagic, "truncated npy header");
  const std::size_t hlen = static_cast<std::size_t>(len_bytes[0]) |
                           (static_cast<std::size_t>(len_bytes[1]) << 8);
  std::string dict(hlen, '\0');
  is.read(dict.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw Error(ErrorKind::BadMagic, "truncated npy header");

  const std::string descr = detail::dict_value(dict, "descr");
  const std::string order = detail::dict_value(dict, "fortran_order");
  if (order != "False")
    throw Error(ErrorKind::UnsupportedDtype, "fortran-order arrays are not supported");

  NpyArray arr;
  arr.shape = detail::parse_shape(detail::dict_value(dict, "shape"));
  if (arr.shape.empty() || arr.shape.size() > 2)
    throw Error(ErrorKind::ShapeMismatch, "only (N,) and (N,K) arrays are supported");

  std::size_t elem_size;
  if (descr == "<f8") {
    arr.dtype = NpyDtype::Float64;
    elem_size = 8;
  } else if (descr == "|b1") {
    arr.dtype = NpyDtype::Bool;
    elem_size = 1;
  } else {
    throw Error(ErrorKind::UnsupportedDtype, "unsupported dtype '" + descr +
                                                 "' (expected '<f8' or '|b1')");
  }

  const std::size_t n = arr.element_count();
  std::vector<char> raw(n * elem_size);
  is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!is) throw Error(ErrorKind::IoError, "npy payload shorter than header shape");
  if (arr.dtype == NpyDtype::Float64) {
    arr.f64.resize(n);
    std::memcpy(arr.f64.data(), raw.data(), raw.size());
  } else {
    arr.b8.resize(n);
    std::memcpy(arr.b8.data(), raw.data(), raw.size());
  }
  return arr;
}

inline NpyArray read_npy(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_npy(is);
}

inline void write_npy(std::ostream& os, const Matrix& m) {
  detail::write_npy_bytes(os, "<f8", {m.rows, m.cols}, m.data.data(), m.data.size() * 8);
}

inline void write_npy(std::ostream& os, const std::vector<double>& v) {
  detail::write_npy_bytes(os, "<f8", {v.size()}, v.data(), v.size() * 8);
}

inline void write_npy_bool(std::ostream& os, const Mask& mask) {
  detail::write_npy_bytes(os, "|b1", {mask.size()}, mask.data(), mask.size());
}

template <typename T>
inline void write_npy_file(const std::string& path, const T& value) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_npy(os, value);
}

inline void write_npy_bool_file(const std::string& path, const Mask& mask) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::IoError, "cannot open " + path + " for writing");
  write_npy_bool(os, mask);
}

// --- typed views -------------------------------------------------------------

inline Matrix as_matrix(const NpyArray& arr) {
  if (arr.dtype != NpyDtype::Float64)
    throw Error(ErrorKind::UnsupportedDtype, "expected a float64 array");
  Matrix m;
  if (arr.shape.size() == 2) {
    m.rows = arr.shape[0];
    m.cols = arr.shape[1];
  } else {
    m.rows = arr.shape[0];
    m.cols = 1;
  }
  m.data = arr.f64;
  return m;
}

inline std::vector<double> as_vector(const NpyArray& arr) {
  if (arr.dtype != NpyDtype::Float64)
    throw Error(ErrorKind::UnsupportedDtype, "expected a float64 array");
  if (arr.shape.size() != 1)
    throw Error(ErrorKind::ShapeMismatch, "expected a 1-D array");
  return arr.f64;
}

inline Mask as_mask(const NpyArray& arr) {
  if (arr.dtype != NpyDtype::Bool)
    throw Error(ErrorKind::UnsupportedDtype, "expected a bool array");
  if (arr.shape.size() != 1)
    throw Error(ErrorKind::ShapeMismatch, "expected a 1-D mask");
  return arr.b8;
}

}  // namespace carkit
