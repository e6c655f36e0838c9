#pragma once

#include "flmgof/scenario.hpp"

#include <iosfwd>
#include <string>

namespace flmgof::harness {

/// Curves file: a header row with the grid nodes (ascending, 0 to 1), then
/// one row of M values per curve. Responses file: one value per line.
/// Every defect raises kParseError naming the file and line.
Dataset ingest_csv(const std::string& curves_path, const std::string& response_path);
Dataset parse_csv(std::istream& curves, std::istream& responses, const std::string& curves_name = "curves",
                  const std::string& responses_name = "responses");

/// Writes with 17 significant digits, so ingest_csv reproduces every value.
void write_curves_csv(const Dataset& data, std::ostream& out);
void write_responses_csv(const Dataset& data, std::ostream& out);
void write_dataset_csv(const Dataset& data, const std::string& curves_path, const std::string& response_path);

} // namespace flmgof::harness
