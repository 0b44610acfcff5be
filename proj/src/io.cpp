#include "catdist/io.hpp"

#include "catdist/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace catdist {

std::string format_number(double x) {
    if (std::isnan(x)) return "NaN";
    if (x == 0.0) return "0";  // folds -0 into 0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string csv_field(std::string_view s, char delimiter) {
    if (s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << delimiter;
        out << csv_field(fields[i], delimiter);
    }
    out << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace catdist
