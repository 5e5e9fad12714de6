#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "resonance/errors.hpp"

namespace resonance {

// 17 significant digits: enough for the printed decimal to parse back to the
// exact binary double, keeping outputs byte-deterministic and lossless.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// A rectangular text table rendered as RFC-4180-style CSV: comma delimiter,
// header row, \n line endings. Cells are preformatted strings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const {
        std::string out;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c > 0)
                out += ',';
            out += header[c];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c > 0)
                    out += ',';
                out += row[c];
            }
            out += '\n';
        }
        return out;
    }
};

// Deliver rendered output: stdout when no path is given, otherwise
// write-then-rename so a failed run never leaves a partial file behind.
inline void deliver_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        std::cout.flush();
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw ScenarioError("cannot open output file for writing: " + tmp);
        out << content;
        if (!out)
            throw ScenarioError("failed writing output file: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ScenarioError("cannot move output into place: " + path + " (" + ec.message() +
                            ")");
    }
}

} // namespace resonance
