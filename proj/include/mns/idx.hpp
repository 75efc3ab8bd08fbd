#pragma once

#include <cstddef>
#include <string>

#include "mns/noise.hpp"

namespace mns {

/// Reads the big-endian IDX image/label container pair (magic 0x00000803
/// for images, 0x00000801 for labels). Features come out row-major, one
/// flattened image per row, optionally scaled into [0,1]; labels shift to
/// 1-based. `limit` must be positive and truncates the load for small runs.
/// Throws std::runtime_error with the byte offset on any format violation.
LabeledDataset load_idx_images(const std::string& images_path, const std::string& labels_path,
                               std::size_t limit, bool normalize);

} // namespace mns
