#include "resonet/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "resonet/signal_io.hpp"

namespace resonet {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValues KeyValues::parse_string(const std::string& text, const std::string& origin) {
    KeyValues kv;
    kv.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw IoError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (kv.values_.count(key))
            throw IoError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.values_[key] = value;
    }
    return kv;
}

KeyValues KeyValues::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

bool KeyValues::has(const std::string& key) const { return values_.count(key) != 0; }

void KeyValues::set(const std::string& key, const std::string& value) { values_[key] = value; }

void KeyValues::set_double(const std::string& key, double value) {
    values_[key] = format_double(value);
}

void KeyValues::set_int(const std::string& key, long long value) {
    values_[key] = std::to_string(value);
}

void KeyValues::set_bool(const std::string& key, bool value) {
    values_[key] = value ? "true" : "false";
}

double KeyValues::parse_double(const std::string& key) const {
    const std::string& s = values_.at(key);
    const char* b = s.data();
    const char* e = b + s.size();
    double out = 0;
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || p != e)
        throw std::invalid_argument(origin_ + ": key '" + key + "' is not a number: '" + s + "'");
    return out;
}

long long KeyValues::parse_int(const std::string& key) const {
    const std::string& s = values_.at(key);
    const char* b = s.data();
    const char* e = b + s.size();
    long long out = 0;
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || p != e)
        throw std::invalid_argument(origin_ + ": key '" + key + "' is not an integer: '" + s + "'");
    return out;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) {
        values_[key] = fallback;
        return fallback;
    }
    return it->second;
}

double KeyValues::get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    if (!values_.count(key)) {
        values_[key] = format_double(fallback);
        return fallback;
    }
    return parse_double(key);
}

long long KeyValues::get_int(const std::string& key, long long fallback) {
    consumed_.insert(key);
    if (!values_.count(key)) {
        values_[key] = std::to_string(fallback);
        return fallback;
    }
    return parse_int(key);
}

bool KeyValues::get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    if (!values_.count(key)) {
        values_[key] = fallback ? "true" : "false";
        return fallback;
    }
    const std::string& s = values_.at(key);
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw std::invalid_argument(origin_ + ": key '" + key + "' is not a boolean: '" + s + "'");
}

std::string KeyValues::require_string(const std::string& key) const {
    consumed_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end())
        throw std::invalid_argument(origin_ + ": missing required key '" + key + "'");
    return it->second;
}

std::set<std::string> KeyValues::unconsumed() const {
    std::set<std::string> out;
    for (const auto& [k, v] : values_)
        if (!consumed_.count(k)) out.insert(k);
    return out;
}

void KeyValues::fail_on_unconsumed() const {
    auto stray = unconsumed();
    if (stray.empty()) return;
    std::string msg = origin_ + ": unknown key(s):";
    for (const auto& k : stray) msg += " " + k;
    throw std::invalid_argument(msg);
}

std::string KeyValues::serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

}  // namespace resonet
