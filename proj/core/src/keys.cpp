#include "fogdeck/keys.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fogdeck {

KeyRing KeyRing::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open key file: " + path);
  KeyRing ring;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string name, hex;
    if (!(fields >> name)) continue;
    if (!(fields >> hex)) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing key");
    try {
      auto key = wire::PresharedKey::from_hex(hex);
      if (name == "default") {
        ring.set_default(key);
      } else {
        ring.set(name, key);
      }
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ring;
}

std::optional<KeyRing> KeyRing::from_environment() {
  const char* path = std::getenv("FOGDECK_KEY_FILE");
  if (path == nullptr || *path == '\0') return std::nullopt;
  return load_file(path);
}

KeyRing KeyRing::derived(std::string label) {
  KeyRing ring;
  ring.derive_label_ = std::move(label);
  return ring;
}

wire::PresharedKey KeyRing::key_for(const std::string& fog_id) const {
  if (auto it = keys_.find(fog_id); it != keys_.end()) return it->second;
  if (default_) return *default_;
  if (derive_label_) return wire::PresharedKey::derive(*derive_label_ + "/" + fog_id);
  throw std::out_of_range("no pre-shared key for fog node " + fog_id);
}

bool KeyRing::has_key(const std::string& fog_id) const {
  return keys_.count(fog_id) > 0 || default_.has_value() || derive_label_.has_value();
}

}  // namespace fogdeck
