#pragma once

#include <json.hpp>

#include <string>

namespace dssl::cli {

using Json = nlohmann::ordered_json;

/// Compact serialization with every floating value printed to 17 significant digits.
/// Non-finite values become null.
std::string dump(const Json& j);

}  // namespace dssl::cli
