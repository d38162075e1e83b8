#pragma once

#include <string>
#include <string_view>

namespace bukhgeim {

/// Git blob id of `content`: SHA-1 over "blob <size>\0" + content, hex encoded.
std::string git_blob_hash(std::string_view content);

}  // namespace bukhgeim
