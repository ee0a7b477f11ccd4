//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_COMMON_HASH_H_
#define DRP_COMMON_HASH_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace drp {

// Lower-case hex SHA-256 digest.
std::string Sha256Hex(std::string_view data);
std::string Sha256File(const std::filesystem::path &path);

}  // namespace drp

#endif  // DRP_COMMON_HASH_H_
