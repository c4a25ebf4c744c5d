#pragma once

#include "docret/feature_model.hpp"

#include <iosfwd>
#include <string>

namespace docret {

/**
 * Binary feature interchange file, little-endian:
 *
 *   "FCBF" | version u16 (=1) | model name (u16 length + UTF-8) | crop_size u32
 *   | n u64 | d u64 | n id records (u16 length + UTF-8, canonical order)
 *   | n*d float32, row-major
 *
 * Values are rounded to float32 on write. Output is byte-deterministic.
 */
inline constexpr std::uint16_t feature_file_version = 1;

void write_feature_file(const FeatureMatrix& matrix, std::ostream& out);
void write_feature_file(const FeatureMatrix& matrix, const std::string& path);

/// Malformed input throws a FormatError or CorruptionError; bad values throw ValidationError.
FeatureMatrix read_feature_file(std::istream& in);
FeatureMatrix read_feature_file(const std::string& path);

/// Rounds every value to the nearest float32, i.e. what a write/read cycle yields.
RowMatrixXd round_to_f32(const RowMatrixXd& values);

} // namespace docret
