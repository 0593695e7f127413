#pragma once

#include <map>
#include <set>
#include <string>

namespace resonet {

// Plain key=value configuration. Lines are `key = value`, blank, or comments
// starting with '#'. Keys are dotted paths (e.g. "bank.decay"). Every read is
// tracked so a loader can reject keys it never consumed (typo protection).
class KeyValues {
  public:
    KeyValues() = default;

    static KeyValues parse_file(const std::string& path);
    static KeyValues parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, long long value);
    void set_bool(const std::string& key, bool value);

    // Typed getters; the defaulted forms record the default into the map so
    // the serialized form shows the fully resolved configuration.
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    long long get_int(const std::string& key, long long fallback);
    bool get_bool(const std::string& key, bool fallback);

    std::string require_string(const std::string& key) const;

    // Keys present in the file but never consumed by any getter.
    std::set<std::string> unconsumed() const;
    void fail_on_unconsumed() const;  // throws listing the stray keys

    // Sorted `key = value` lines; stable across runs.
    std::string serialize() const;

  private:
    double parse_double(const std::string& key) const;
    long long parse_int(const std::string& key) const;

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> consumed_;
    std::string origin_ = "<empty>";
};

}  // namespace resonet
