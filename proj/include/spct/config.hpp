#pragma once

// key=value configuration files ('#' starts a comment). Unknown keys are
// ignored by consumers; typed getters fall back to defaults.

#include <map>
#include <string>

#include "spct/imagecore.hpp"

namespace spct {

class Config {
public:
    Config() = default;
    static Config load(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& def = {}) const;
    double get_double(const std::string& key, double def) const;
    int get_int(const std::string& key, int def) const;
    bool get_bool(const std::string& key, bool def) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

private:
    std::map<std::string, std::string> kv_;
};

// Parses "x,y,w,h".
Rect parse_rect(const std::string& s);

}  // namespace spct
