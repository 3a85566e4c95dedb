#pragma once

#include <string>

#include "stylerag/index/style_index.hpp"

namespace stylerag::index {

// Binary snapshot of a StyleIndex. Little-endian throughout, length-prefixed
// sections, CRC32 trailer over everything before it. Writes go through a
// temp file plus rename so a crash never leaves a torn snapshot behind.
void save_index(const StyleIndex& index, const std::string& path);

// Throws UnsupportedVersion for a future format revision, CorruptFile for
// bad magic, CRC mismatch, truncation, or structural damage, IoError when
// the file cannot be read at all.
StyleIndex load_index(const std::string& path);

}  // namespace stylerag::index
