#pragma once

#include <string>
#include <utility>
#include <vector>

#include "matnet/matrix.hpp"
#include "matnet/train.hpp"

namespace matnet {

// Binary model container: little-endian magic "MATN", a format version, then
// named parameter blocks with shape headers and raw doubles.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const std::string& path, const std::vector<NamedParam>& params);

std::vector<std::pair<std::string, Matrix>> load_model(const std::string& path);

// Writes loaded values back into a matching parameter list; names and shapes
// must agree exactly.
void restore_model(const std::string& path, const std::vector<NamedParam>& params);

}  // namespace matnet
