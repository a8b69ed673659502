#pragma once

#include <string>
#include <utility>
#include <vector>

#include "snet/fusion_category.hpp"

namespace snet {

// Embedded category files, loaded and structurally validated on request.
std::vector<std::string> builtin_names();
FusionCategory builtin(const std::string& name);

// Accepts "fib" for "fibonacci".
std::string canonical_builtin_name(const std::string& name);

namespace detail {
const std::vector<std::pair<std::string, std::string>>& embedded_categories();
}

}  // namespace snet
