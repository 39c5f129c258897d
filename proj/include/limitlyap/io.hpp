#pragma once

// Line-oriented system-definition files and CSV emission.
//
// File grammar: one `key = expression` per line, `#` starts a comment.
// Keys: fx, fy, transform_u, transform_v, rho, window (= xmin,xmax,ymin,ymax).

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "limitlyap/error.hpp"
#include "limitlyap/expr.hpp"
#include "limitlyap/system.hpp"

namespace limitlyap {

struct SystemDefinition {
    std::optional<Expr> fx, fy;
    std::optional<Expr> transform_u, transform_v;
    std::optional<Expr> rho;
    std::optional<Window> window;
};

namespace detail {

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace detail

inline SystemDefinition parse_system_text(const std::string& text,
                                          const std::string& origin = "<input>") {
    SystemDefinition def;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = origin + ":" + std::to_string(lineno);
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("cli/io", where + ": expected 'key = expression'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty()) throw Error("cli/io", where + ": empty value for '" + key + "'");

        auto parse_expr = [&](const char* what) {
            try {
                return parse(value);
            } catch (const Error& e) {
                throw Error("cli/io", where + ": bad " + std::string(what) + ": " + e.what());
            }
        };
        if (key == "fx") def.fx = parse_expr("fx");
        else if (key == "fy") def.fy = parse_expr("fy");
        else if (key == "transform_u") def.transform_u = parse_expr("transform_u");
        else if (key == "transform_v") def.transform_v = parse_expr("transform_v");
        else if (key == "rho") def.rho = parse_expr("rho");
        else if (key == "window") {
            std::istringstream vs(value);
            std::vector<double> nums;
            std::string part;
            while (std::getline(vs, part, ',')) {
                try {
                    nums.push_back(std::stod(detail::trim(part)));
                } catch (const std::exception&) {
                    throw Error("cli/io", where + ": bad window component '" + part + "'");
                }
            }
            if (nums.size() != 4)
                throw Error("cli/io", where + ": window needs xmin,xmax,ymin,ymax");
            if (!(nums[1] > nums[0]) || !(nums[3] > nums[2]))
                throw Error("cli/io", where + ": window is empty");
            def.window = Window{nums[0], nums[1], nums[2], nums[3]};
        } else {
            throw Error("cli/io", where + ": unknown key '" + key + "'");
        }
    }
    return def;
}

inline SystemDefinition read_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli/io", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_system_text(buf.str(), path);
}

// CSV with a header row, '.' decimal separator, 17 significant digits.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error("cli/io", "cannot write '" + path + "'");
    }

    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

} // namespace limitlyap
