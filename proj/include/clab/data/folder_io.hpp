// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_DATA_FOLDER_IO_HPP
#define CLAB_DATA_FOLDER_IO_HPP

#include "clab/data/dataset.hpp"

#include <filesystem>

namespace clab::data {

// Folder layout: 8-bit RGB PNG files plus a UTF-8 CSV with the exact header
// `path,label,location_id,timestamp`. Paths are relative to the CSV's
// directory. Pixel value 255 maps to 1.0 exactly.

/// Reads a PNG as H x W x 3 doubles in [0, 1].
Vec read_png(const std::filesystem::path& path, Index& height, Index& width);

/// Writes an 8-bit RGB PNG, quantizing with round(v * 255).
void write_png(const std::filesystem::path& path, const Vec& image, Index height,
               Index width);

/// Loads a dataset; errors name the offending CSV row or file path.
Dataset load_folder(const std::filesystem::path& dir,
                    const std::filesystem::path& metadata_csv);

/// Same, with the default metadata file `dir/metadata.csv`.
Dataset load_folder(const std::filesystem::path& dir);

/// Exports to the folder layout (images/ subdirectory + metadata.csv).
/// Requires a 3-channel dataset.
void export_folder(const Dataset& ds, const std::filesystem::path& dir);

} // namespace clab::data

#endif // CLAB_DATA_FOLDER_IO_HPP
