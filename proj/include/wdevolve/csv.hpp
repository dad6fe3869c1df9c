#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wde {

/// Minimal RFC 4180 reader: quoted fields, embedded commas/quotes/newlines.
/// Returns one vector of fields per row; blank rows are skipped.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

/// Quotes a field only when it needs quoting.
std::string csv_field(const std::string& value);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace wde
