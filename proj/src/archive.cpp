#include "pevs/archive.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace pevs {

namespace {

constexpr char kMagic[8] = {'P', 'E', 'V', 'S', 'A', 'R', 'C', '1'};

static_assert(std::endian::native == std::endian::little,
              "archive IO assumes a little-endian host");

void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw ArchiveError("archive truncated while reading a length field");
  return v;
}

}  // namespace

std::string ArchiveFile::header_value(const std::string& key) const {
  const std::string needle = key + "=";
  std::size_t pos = 0;
  while (pos < header.size()) {
    std::size_t eol = header.find('\n', pos);
    if (eol == std::string::npos) eol = header.size();
    const std::string line = header.substr(pos, eol - pos);
    if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
    pos = eol + 1;
  }
  throw ArchiveError("archive header is missing key '" + key + "'");
}

bool ArchiveFile::has_header(const std::string& key) const {
  try {
    (void)header_value(key);
    return true;
  } catch (const ArchiveError&) {
    return false;
  }
}

void write_archive(const std::string& path, const ArchiveFile& archive) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ArchiveError("cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof kMagic);
  put_u64(os, archive.header.size());
  os.write(archive.header.data(), std::streamsize(archive.header.size()));
  for (const DenseMatrix& m : archive.matrices) {
    put_u64(os, m.rows());
    put_u64(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data()),
             std::streamsize(m.rows() * m.cols() * sizeof(double)));
  }
  if (!os) throw ArchiveError("write failure on '" + path + "'");
}

ArchiveFile read_archive(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArchiveError("cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ArchiveError("'" + path + "' is not a PEVSARC1 archive");

  ArchiveFile archive;
  const std::uint64_t hlen = get_u64(is);
  archive.header.resize(hlen);
  is.read(archive.header.data(), std::streamsize(hlen));
  if (!is) throw ArchiveError("archive header truncated in '" + path + "'");

  while (true) {
    std::uint64_t rows = 0;
    is.read(reinterpret_cast<char*>(&rows), sizeof rows);
    if (is.eof()) break;
    if (!is) throw ArchiveError("archive matrix prefix truncated in '" + path + "'");
    const std::uint64_t cols = get_u64(is);
    if (rows == 0 || cols == 0 || rows * cols > (1ull << 32))
      throw ArchiveError("archive matrix dimensions corrupt in '" + path + "'");
    DenseMatrix m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()), std::streamsize(rows * cols * sizeof(double)));
    if (!is) throw ArchiveError("archive matrix payload truncated in '" + path + "'");
    archive.matrices.push_back(std::move(m));
  }
  return archive;
}

}  // namespace pevs
