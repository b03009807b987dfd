#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mindstone/errors.hpp"

namespace mindstone::jsonl {

using nlohmann::json;

/// Calls `fn(record, line_number)` for every non-blank line. Parse failures
/// raise FormatError naming the file and line.
template <typename Fn>
void for_each(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        fn(record, lineno);
    }
}

inline std::string require_string(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw FormatError(where + ": missing string field '" + key + "'");
    }
    return it->get<std::string>();
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

/// Compact dump used for every JSONL line we emit.
inline std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace mindstone::jsonl
