#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace fbqos::cli {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move output into place at " + path + ": " + ec.message());
    }
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

csv_table& csv_table::add(double v) {
    rows_.back().push_back(format_number(v));
    return *this;
}

csv_table& csv_table::add(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        rows_.back().push_back(s);
    } else {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c == '\n' ? ' ' : c;
        }
        rows_.back().push_back(q + "\"");
    }
    return *this;
}

csv_table& csv_table::add_count(unsigned long long v) {
    rows_.back().push_back(std::to_string(v));
    return *this;
}

std::string csv_table::str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

nlohmann::ordered_json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

}  // namespace fbqos::cli
