#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coda {

// Minimal RFC-4180-style CSV. Fields containing commas, quotes or newlines
// are quoted; embedded quotes are doubled.

std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

// Splits one CSV line into fields. Throws ParseError on unbalanced quotes.
std::vector<std::string> csv_split(const std::string& line, long line_number = -1);

// Reads all rows; the first row is returned separately as the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; throws Error if absent.
    size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

// Deterministic shortest-round-trip formatting for doubles.
std::string format_double(double v);

}  // namespace coda
