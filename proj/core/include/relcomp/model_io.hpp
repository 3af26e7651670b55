#pragma once

#include <string>
#include <string_view>

#include "relcomp/model.hpp"

namespace relcomp {

/// Parses a JSON model document (schema in docs/model-format.md).
/// Throws ModelError on schema or model violations.
SystemModel parse_model(std::string_view json_text, const std::string& source = "<string>");

/// Reads and parses a model file. Throws IoError if it cannot be read.
SystemModel load_model(const std::string& path);

}  // namespace relcomp
