#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace mlr::idx {

/// Reads an IDX file (big-endian magic, dims, payload).
/// IDX3 image data becomes one flattened row per image; unsigned-byte
/// image values are scaled to [0,1]. IDX1 label data becomes an N x 1
/// matrix of raw values. Throws std::runtime_error on a bad magic number
/// or a truncated file.
Eigen::MatrixXd read_idx(const std::string& path);

/// Rows of the image file whose label equals `label`.
Eigen::MatrixXd read_idx_filtered(const std::string& image_path, const std::string& label_path,
                                  int label);

/// Writers for fixtures and round-trip checks (unsigned-byte payload;
/// image values are expected in [0,1] and quantized to 0..255).
void write_idx_images(const std::string& path, const Eigen::MatrixXd& rows01, int img_rows,
                      int img_cols);
void write_idx_labels(const std::string& path, const std::vector<uint8_t>& labels);

}  // namespace mlr::idx
