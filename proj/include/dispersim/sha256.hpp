#ifndef DISPERSIM_SHA256_HPP
#define DISPERSIM_SHA256_HPP

#include <string>

namespace dispersim {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file_hex(const std::string& path);

}  // namespace dispersim

#endif
