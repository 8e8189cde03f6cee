#pragma once

#include <string>

#include "gtcc/coding.hpp"
#include "gtcc/field_matrix.hpp"

namespace gtcc {

/// Flat binary matrix file: magic "GTFM", u32 version, then u64 modulus,
/// u64 rows, u64 cols, followed by rows*cols row-major values. All integers
/// little-endian, 8 bytes per value.
void write_field_matrix(const std::string& path, const FieldMatrix& m);
FieldMatrix read_field_matrix(const std::string& path);

/// One file per worker, named share_<w>.bin, each an s x c matrix.
void dump_shares(const std::string& dir, const EncodedShares& shares);

}  // namespace gtcc
