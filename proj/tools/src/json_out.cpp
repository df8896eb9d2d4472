#include "json_out.hpp"

#include <cmath>
#include <cstdio>

namespace dssl::cli {
namespace {

void emit(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(key).dump();
        out += ':';
        emit(value, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        emit(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  emit(j, out);
  return out;
}

}  // namespace dssl::cli
