#ifndef PEVS_SERIALIZE_HPP
#define PEVS_SERIALIZE_HPP

#include <string>

#include "pevs/archive.hpp"
#include "pevs/offline.hpp"
#include "pevs/surrogate.hpp"

namespace pevs {

/// Packs a snapshot set into an archive. `config_text` (key=value lines
/// describing the producing run) is embedded verbatim after the archive's
/// own header keys.
ArchiveFile snapshots_to_archive(const SnapshotSet& snaps, const std::string& config_text);
SnapshotSet snapshots_from_archive(const ArchiveFile& archive);

ArchiveFile model_to_archive(const SurrogateModel& model, const std::string& config_text);
SurrogateModel model_from_archive(const ArchiveFile& archive);

}  // namespace pevs

#endif
