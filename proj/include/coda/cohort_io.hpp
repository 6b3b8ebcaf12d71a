#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coda/record.hpp"

namespace coda {

enum class CohortFormat { jsonl, csv };

CohortFormat cohort_format_from_string(const std::string& s);

// Parses a cohort stream. Patient header lines and event lines may appear in
// any order; events are grouped per patient and sorted by timestamp.
// Malformed lines raise ParseError with the line number. Records with an
// unknown channel kind, events without a patient header, and events outside
// the stay window are dropped and reported through `warnings`.
CohortDataset parse_events(std::istream& in, CohortFormat format,
                           std::vector<std::string>* warnings = nullptr);

CohortDataset parse_events_file(const std::string& path, CohortFormat format,
                                std::vector<std::string>* warnings = nullptr);

void serialize_cohort(const CohortDataset& ds, std::ostream& out, CohortFormat format);
void serialize_cohort_file(const CohortDataset& ds, const std::string& path, CohortFormat format);

}  // namespace coda
