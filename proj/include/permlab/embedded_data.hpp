#pragma once

#include <string_view>

namespace permlab::embedded {

// The data/ documents compiled into the library verbatim (spliced in at
// build configuration time, so file and binary cannot drift).
std::string_view registry_json();
std::string_view matrix_json();
std::string_view patterns_json();

}  // namespace permlab::embedded
