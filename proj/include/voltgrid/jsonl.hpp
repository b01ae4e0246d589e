#pragma once

#include "voltgrid/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace voltgrid {

/// Writes one JSON document per line, replacing the file.
inline void write_jsonl(const std::string& path,
                        const std::vector<nlohmann::ordered_json>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    for (const auto& row : rows) out << row.dump() << '\n';
}

/// Appends one document as one line.
inline void append_jsonl(const std::string& path,
                         const nlohmann::ordered_json& row) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw ConfigError("cannot open '" + path + "' for appending");
    out << row.dump() << '\n';
}

/// Reads every line as a JSON document; blank lines are skipped.
inline std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    std::vector<nlohmann::json> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            rows.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("bad JSON line: ") + e.what(), line_no);
        }
    }
    return rows;
}

/// Reads a whole file as one JSON document.
inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad JSON in '" + path + "': " + e.what());
    }
}

/// Writes one JSON document, pretty-printed, replacing the file.
inline void write_json_file(const std::string& path,
                            const nlohmann::ordered_json& doc) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
}

} // namespace voltgrid
