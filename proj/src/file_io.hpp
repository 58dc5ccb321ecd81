#pragma once

#include <filesystem>

#include "expunge/bytes.hpp"

namespace expunge::detail {

Bytes read_file(const std::filesystem::path& path);
/// Writes to a temporary sibling, fsyncs, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, ByteView data);
/// Overwrites bytes at `offset` in an existing file and fsyncs it.
void overwrite_at(const std::filesystem::path& path, std::uint64_t offset, ByteView data);
void append_line(const std::filesystem::path& path, std::string_view line);

}  // namespace expunge::detail
