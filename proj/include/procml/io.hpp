#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "procml/error.hpp"
#include "procml/landmark.hpp"

namespace procml {

/// Shortest decimal form that restores the exact double on read-back.
inline std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

struct LandmarkFile {
    std::vector<std::string> ids;
    std::vector<LandmarkConfig> configs;
};

/* Specimen text format.  One block per configuration:
 *
 *   specimen <id> p=<count> k=<dim>
 *   <x> <y> [<z>]          (one line per landmark)
 *
 * Blocks are separated by a blank line.  Coordinates are written with 17
 * significant digits, so write followed by read is bit-exact.
 */
inline void write_landmark_stream(std::ostream& out,
                                  const std::vector<LandmarkConfig>& configs,
                                  const std::vector<std::string>& ids = {}) {
    if (!ids.empty() && ids.size() != configs.size())
        throw InvalidArgument("id list length does not match configuration count");
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const LandmarkConfig& cfg = configs[i];
        const std::string id = ids.empty() ? std::to_string(i) : ids[i];
        if (i > 0)
            out << "\n";
        out << "specimen " << id << " p=" << cfg.landmark_count()
            << " k=" << cfg.dimension() << "\n";
        for (int r = 0; r < cfg.landmark_count(); ++r) {
            for (int c = 0; c < cfg.dimension(); ++c) {
                if (c > 0)
                    out << " ";
                out << format_double(cfg.coords()(r, c));
            }
            out << "\n";
        }
    }
}

inline void write_landmark_file(const std::string& path,
                                const std::vector<LandmarkConfig>& configs,
                                const std::vector<std::string>& ids = {}) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open for writing: " + path);
    write_landmark_stream(out, configs, ids);
}

inline LandmarkFile read_landmark_stream(std::istream& in,
                                         const std::string& origin = "<stream>") {
    LandmarkFile result;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        std::istringstream header(line);
        std::string tag, id, ptok, ktok;
        header >> tag >> id >> ptok >> ktok;
        if (tag != "specimen" || id.empty() || ptok.rfind("p=", 0) != 0 ||
            ktok.rfind("k=", 0) != 0)
            fail("expected 'specimen <id> p=<count> k=<dim>', got '" + line + "'");
        int p = 0, k = 0;
        try {
            p = std::stoi(ptok.substr(2));
            k = std::stoi(ktok.substr(2));
        } catch (const std::exception&) {
            fail("unparsable landmark count or dimension in '" + line + "'");
        }
        if (p < 3 || (k != 2 && k != 3))
            fail("invalid header values p=" + std::to_string(p) +
                 " k=" + std::to_string(k));

        Matrix coords(p, k);
        for (int r = 0; r < p; ++r) {
            if (!std::getline(in, line))
                fail("unexpected end of input inside specimen " + id);
            ++line_no;
            const char* s = line.c_str();
            char* end = nullptr;
            for (int c = 0; c < k; ++c) {
                const double v = std::strtod(s, &end);
                if (end == s)
                    fail("expected " + std::to_string(k) + " coordinates, got '" +
                         line + "'");
                coords(r, c) = v;
                s = end;
            }
            while (*s == ' ' || *s == '\t' || *s == '\r')
                ++s;
            if (*s != '\0')
                fail("trailing characters after coordinates: '" + line + "'");
        }
        result.ids.push_back(id);
        try {
            result.configs.emplace_back(std::move(coords));
        } catch (const DataError& e) {
            fail(e.what());
        }
    }
    if (result.configs.empty())
        throw ParseError(origin + ": no specimens found");
    return result;
}

inline LandmarkFile read_landmark_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open for reading: " + path);
    return read_landmark_stream(in, path);
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Flat key = value file with optional [section] headers and '#' comments.
/// Used for both run configuration and the emitted manifest.
struct ConfigData {
    KeyValues global;
    std::vector<std::pair<std::string, KeyValues>> sections;

    const KeyValues* find_section(const std::string& name) const {
        for (const auto& [sec, entries] : sections)
            if (sec == name)
                return &entries;
        return nullptr;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline ConfigData read_config_stream(std::istream& in,
                                     const std::string& origin = "<stream>") {
    ConfigData data;
    KeyValues* current = &data.global;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError(origin + ":" + std::to_string(line_no) +
                                 ": unterminated section header '" + t + "'");
            data.sections.emplace_back(detail::trim(t.substr(1, t.size() - 2)),
                                       KeyValues{});
            current = &data.sections.back().second;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": expected key = value, got '" + t + "'");
        current->emplace_back(detail::trim(t.substr(0, eq)),
                              detail::trim(t.substr(eq + 1)));
    }
    return data;
}

inline ConfigData read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open config file: " + path);
    return read_config_stream(in, path);
}

inline void write_config_file(const std::string& path, const ConfigData& data) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open for writing: " + path);
    for (const auto& [key, value] : data.global)
        out << key << " = " << value << "\n";
    bool sep = !data.global.empty();
    for (const auto& [sec, entries] : data.sections) {
        if (sep)
            out << "\n";
        sep = true;
        out << "[" << sec << "]\n";
        for (const auto& [key, value] : entries)
            out << key << " = " << value << "\n";
    }
}

} // namespace procml
