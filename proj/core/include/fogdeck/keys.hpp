#pragma once

#include <map>
#include <optional>
#include <string>

#include "fogdeck/wire.hpp"

namespace fogdeck {

/// Pre-shared keys by fog id, with an optional fallback for unlisted nodes.
///
/// Key file format, one entry per line, '#' starts a comment:
///   fog-1    <64 hex chars>
///   default  <64 hex chars>
class KeyRing {
 public:
  static KeyRing load_file(const std::string& path);
  /// Reads the file named by FOGDECK_KEY_FILE; nullopt when the variable is unset.
  static std::optional<KeyRing> from_environment();
  /// Every node gets PresharedKey::derive(label + "/" + fog_id).
  static KeyRing derived(std::string label);

  void set(const std::string& fog_id, const wire::PresharedKey& key) { keys_[fog_id] = key; }
  void set_default(const wire::PresharedKey& key) { default_ = key; }

  /// Throws std::out_of_range when no key applies.
  wire::PresharedKey key_for(const std::string& fog_id) const;
  bool has_key(const std::string& fog_id) const;

 private:
  std::map<std::string, wire::PresharedKey> keys_;
  std::optional<wire::PresharedKey> default_;
  std::optional<std::string> derive_label_;
};

}  // namespace fogdeck
