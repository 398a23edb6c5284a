#ifndef PEVS_ARCHIVE_HPP
#define PEVS_ARCHIVE_HPP

#include <string>
#include <utility>
#include <vector>

#include "pevs/matrix.hpp"

namespace pevs {

/// Single-file archive: 8-byte magic "PEVSARC1", a length-prefixed plain-text
/// header, then matrices each prefixed by (rows, cols) as little-endian u64,
/// entries as little-endian 64-bit floats in row-major order.
struct ArchiveFile {
  std::string header;  // key=value lines
  std::vector<DenseMatrix> matrices;

  /// Value of a "key=value" header line; throws ArchiveError if missing.
  std::string header_value(const std::string& key) const;
  bool has_header(const std::string& key) const;
};

void write_archive(const std::string& path, const ArchiveFile& archive);
ArchiveFile read_archive(const std::string& path);

}  // namespace pevs

#endif
