#include "bukhgeim/provenance.hpp"

#include <openssl/evp.h>

#include <cstdio>

#include "bukhgeim/error.hpp"

namespace bukhgeim {

std::string git_blob_hash(std::string_view content) {
  std::string message = "blob " + std::to_string(content.size());
  message.push_back('\0');
  message.append(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(message.data(), message.size(), digest, &length, EVP_sha1(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-1 digest failed");
  }
  std::string hex(2 * length, '0');
  for (unsigned int i = 0; i < length; ++i) std::snprintf(&hex[2 * i], 3, "%02x", digest[i]);
  return hex;
}

}  // namespace bukhgeim
