#pragma once

#include "usc/geometry.hpp"

#include <string>

namespace usc {

// {"k": 3, "N": 8, "maps": [{"sym": "id", "tx": "0/1", "ty": "1/3"}, ...]}
CarpetSpec parse_spec_json(const std::string& text);  // throws SpecError
std::string spec_to_json(const CarpetSpec& spec);     // canonical form
CarpetSpec load_spec_file(const std::string& path);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace usc
