// On-disk matrix formats.
//
// CSV: one row per line, comma separated, '.' decimal point, no header.
// Values are written in shortest round-trip form, so write -> read is exact.
//
// Binary: the 8-byte magic "SMFMAT01", then rows and cols as 64-bit
// little-endian unsigned integers, then rows*cols IEEE-754 doubles in
// little-endian byte order, row-major.
#ifndef SMF_MATRIX_IO_HPP
#define SMF_MATRIX_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "smf/matrix.hpp"

namespace smf {

inline constexpr char kBinaryMagic[8] = {'S', 'M', 'F', 'M', 'A', 'T', '0', '1'};

DenseMatrix parse_csv_matrix(const std::string& text);
std::string format_csv_matrix(const DenseMatrix& m);
/// Shortest decimal that reads back to exactly `value`.
std::string format_double(double value);

DenseMatrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const DenseMatrix& m);

DenseMatrix read_binary_matrix(const std::filesystem::path& path);
void write_binary_matrix(const std::filesystem::path& path, const DenseMatrix& m);

/// Reads either format, choosing binary when the file starts with the magic.
DenseMatrix read_matrix(const std::filesystem::path& path);

}  // namespace smf

#endif  // SMF_MATRIX_IO_HPP
