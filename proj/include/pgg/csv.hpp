#pragma once

#include <string>
#include <vector>

namespace pgg {

// Minimal CSV support: UTF-8, header row required, "." decimal separator,
// RFC-style quoting on read, quoting on write only when a field needs it.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; throws Error(ingestion) naming the column when
    // absent (or -1 with required=false).
    int col(const std::string& name, bool required = true) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Formatting used for every real written to disk: 12 significant digits.
std::string fmt_real(double v);

double parse_real(const std::string& s);
int parse_int(const std::string& s);
bool parse_bool01(const std::string& s);

}  // namespace pgg
