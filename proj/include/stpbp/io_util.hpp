#pragma once

#include <functional>
#include <iosfwd>
#include <string>

namespace stpbp {

// shortest decimal form that round-trips a double exactly
std::string g17(double x);

// writes through a temp file in the same directory, then renames into
// place, so readers never observe a partial file
void write_file_atomic(const std::string& path,
                       const std::function<void(std::ostream&)>& writer);

} // namespace stpbp
