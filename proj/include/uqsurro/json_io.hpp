#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "uqsurro/errors.hpp"

namespace uqsurro {

using json = nlohmann::ordered_json;

// Serializes with floats at 17 significant digits (lossless round trip);
// nlohmann's default shortest-representation output would not honor the
// artifact format contract.
inline void dump_json_17g(const json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in + json(it.key()).dump() + ": ";
                dump_json_17g(it.value(), out, indent, depth + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[";
            bool first = true;
            for (const auto& el : j) {
                if (!first) out += ", ";
                first = false;
                dump_json_17g(el, out, indent, depth + 1);
            }
            out += "]";
            return;
        }
        case json::value_t::number_float: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
            out += buf;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

inline std::string dump_json_17g(const json& j) {
    std::string out;
    dump_json_17g(j, out, 2, 0);
    out += "\n";
    return out;
}

// write-temp-then-rename so partially written files are never observed
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw DataError("write to '" + tmp.string() + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    atomic_write_file(path, dump_json_17g(j));
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("'" + path.string() + "': " + e.what());
    }
}

} // namespace uqsurro
