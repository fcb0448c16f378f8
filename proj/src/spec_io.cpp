#include "usc/spec_io.hpp"

#include "usc/errors.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace usc {

using nlohmann::json;

CarpetSpec parse_spec_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("spec is not valid JSON: ") + e.what());
  }
  try {
    int k = j.at("k").get<int>();
    const auto& arr = j.at("maps");
    if (!arr.is_array()) throw SpecError("'maps' must be an array");
    std::vector<Similarity> maps;
    for (const auto& m : arr) {
      Similarity s;
      s.symmetry = parse_symmetry(m.value("sym", std::string("id")));
      auto field = [&](const char* key) {
        const auto& v = m.at(key);
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<long long>());
        throw SpecError(std::string("'") + key + "' must be a \"p/q\" string");
      };
      s.tx = field("tx");
      s.ty = field("ty");
      maps.push_back(std::move(s));
    }
    if (j.contains("N") && j.at("N").get<int>() != static_cast<int>(maps.size()))
      throw SpecError("N does not match the number of maps");
    return CarpetSpec(k, std::move(maps));
  } catch (const json::exception& e) {
    throw SpecError(std::string("malformed spec: ") + e.what());
  }
}

std::string spec_to_json(const CarpetSpec& spec) {
  json j;
  j["k"] = spec.k();
  j["N"] = spec.N();
  j["maps"] = json::array();
  for (const auto& m : spec.maps())
    j["maps"].push_back({{"sym", std::string(name(m.symmetry))}, {"tx", to_string(m.tx)}, {"ty", to_string(m.ty)}});
  return j.dump();
}

CarpetSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec_json(ss.str());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace usc
