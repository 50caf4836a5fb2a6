#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace reconvat {
namespace config {

/// Flat key-value config text: one `key = value` (or `key value`) per
/// line, '#' comments. Unknown keys are the caller's job to reject.
inline std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string key, value;
        std::istringstream ls(line);
        if (!(ls >> key)) continue;
        ls >> value;
        if (value == "=") ls >> value;
        if (!key.empty() && key.back() == '=') key.pop_back();
        if (value.empty())
            throw std::runtime_error("config line without value: " + line);
        kv[key] = value;
    }
    return kv;
}

}  // namespace config
}  // namespace reconvat
