#include "mlr/idx.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mlr::idx {

namespace {

constexpr uint8_t kTypeUByte = 0x08;
constexpr uint8_t kTypeSByte = 0x09;
constexpr uint8_t kTypeShort = 0x0B;
constexpr uint8_t kTypeInt = 0x0C;
constexpr uint8_t kTypeFloat = 0x0D;
constexpr uint8_t kTypeDouble = 0x0E;

uint32_t read_u32_be(std::istream& is, const std::string& path) {
  uint8_t b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("truncated IDX file: " + path);
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | b[3];
}

size_t type_size(uint8_t t) {
  switch (t) {
    case kTypeUByte:
    case kTypeSByte: return 1;
    case kTypeShort: return 2;
    case kTypeInt:
    case kTypeFloat: return 4;
    case kTypeDouble: return 8;
  }
  throw std::runtime_error("unsupported IDX element type");
}

double decode(const uint8_t* p, uint8_t t) {
  switch (t) {
    case kTypeUByte: return *p;
    case kTypeSByte: return static_cast<int8_t>(*p);
    case kTypeShort: return static_cast<int16_t>((uint16_t(p[0]) << 8) | p[1]);
    case kTypeInt:
      return static_cast<int32_t>((uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) |
                                  (uint32_t(p[2]) << 8) | p[3]);
    case kTypeFloat: {
      const uint32_t bits =
          (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3];
      float f;
      static_assert(sizeof(f) == 4);
      std::memcpy(&f, &bits, 4);
      return f;
    }
    case kTypeDouble: {
      uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) bits = (bits << 8) | p[i];
      double d;
      std::memcpy(&d, &bits, 8);
      return d;
    }
  }
  throw std::runtime_error("unsupported IDX element type");
}

}  // namespace

Eigen::MatrixXd read_idx(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);

  const uint32_t magic = read_u32_be(is, path);
  if ((magic & 0xFFFF0000u) != 0)
    throw std::runtime_error("bad IDX magic number in " + path);
  const uint8_t type = (magic >> 8) & 0xFF;
  const uint8_t ndims = magic & 0xFF;
  if (ndims < 1 || ndims > 3) throw std::runtime_error("unsupported IDX rank in " + path);
  const size_t elem = type_size(type);

  std::vector<uint32_t> dims(ndims);
  for (auto& d : dims) d = read_u32_be(is, path);

  const uint64_t n = dims[0];
  uint64_t row_len = 1;
  for (size_t i = 1; i < dims.size(); ++i) row_len *= dims[i];

  std::vector<uint8_t> payload(n * row_len * elem);
  if (!is.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(payload.size())))
    throw std::runtime_error("truncated IDX file: " + path);

  const double scale = (type == kTypeUByte && ndims >= 2) ? 1.0 / 255.0 : 1.0;
  Eigen::MatrixXd out(n, row_len);
  for (uint64_t r = 0; r < n; ++r)
    for (uint64_t c = 0; c < row_len; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          scale * decode(payload.data() + (r * row_len + c) * elem, type);
  return out;
}

Eigen::MatrixXd read_idx_filtered(const std::string& image_path, const std::string& label_path,
                                  int label) {
  const Eigen::MatrixXd images = read_idx(image_path);
  const Eigen::MatrixXd labels = read_idx(label_path);
  if (labels.cols() != 1 || labels.rows() != images.rows())
    throw std::runtime_error("label file does not match image file");
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < labels.rows(); ++i)
    if (static_cast<int>(labels(i, 0)) == label) ++count;
  Eigen::MatrixXd out(count, images.cols());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < labels.rows(); ++i)
    if (static_cast<int>(labels(i, 0)) == label) out.row(k++) = images.row(i);
  return out;
}

namespace {

void write_u32_be(std::ostream& os, uint32_t v) {
  const uint8_t b[4] = {uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8), uint8_t(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

void write_idx_images(const std::string& path, const Eigen::MatrixXd& rows01, int img_rows,
                      int img_cols) {
  if (static_cast<Eigen::Index>(img_rows) * img_cols != rows01.cols())
    throw std::invalid_argument("image shape does not match row length");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_u32_be(os, 0x00000803u);
  write_u32_be(os, static_cast<uint32_t>(rows01.rows()));
  write_u32_be(os, static_cast<uint32_t>(img_rows));
  write_u32_be(os, static_cast<uint32_t>(img_cols));
  for (Eigen::Index r = 0; r < rows01.rows(); ++r)
    for (Eigen::Index c = 0; c < rows01.cols(); ++c) {
      const double v = std::min(1.0, std::max(0.0, rows01(r, c)));
      const uint8_t byte = static_cast<uint8_t>(std::lround(v * 255.0));
      os.write(reinterpret_cast<const char*>(&byte), 1);
    }
}

void write_idx_labels(const std::string& path, const std::vector<uint8_t>& labels) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_u32_be(os, 0x00000801u);
  write_u32_be(os, static_cast<uint32_t>(labels.size()));
  os.write(reinterpret_cast<const char*>(labels.data()),
           static_cast<std::streamsize>(labels.size()));
}

}  // namespace mlr::idx
