#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fbqos::cli {

// Writes to a temporary file in the same directory, then renames it over
// the destination. Creates the directory if needed.
void write_atomic(const std::string& path, const std::string& content);

// %.12g, with nan / inf spelled out; locale independent.
std::string format_number(double v);

class csv_table {
public:
    explicit csv_table(std::vector<std::string> header) : header_(std::move(header)) {}

    csv_table& row() {
        rows_.emplace_back();
        return *this;
    }
    csv_table& add(double v);
    csv_table& add(const std::string& s);
    csv_table& add(const char* s) { return add(std::string(s)); }
    csv_table& add_count(unsigned long long v);

    std::size_t size() const { return rows_.size(); }
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string json_text(const nlohmann::ordered_json& j);

// NaN and infinities become null in JSON; finite values pass through.
nlohmann::ordered_json json_number(double v);

}  // namespace fbqos::cli
