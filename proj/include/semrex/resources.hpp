#pragma once

#include <string_view>

namespace semrex {

/// Contents of a file under data/, compiled into the library. `name` is the
/// path relative to data/, e.g. "prompts/max_acts.txt". Throws
/// std::out_of_range for unknown names.
std::string_view resource(std::string_view name);

}  // namespace semrex
