#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "pushsum/error.hpp"

namespace pushsum {

/// %.17g: enough digits to round-trip any double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_json(std::ostringstream& out, const nlohmann::ordered_json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << inner << nlohmann::ordered_json(it.key()).dump() << ": ";
        write_json(out, it.value(), indent + 1);
      }
      out << '\n' << pad << '}';
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out << ",\n";
        first = false;
        out << inner;
        write_json(out, v, indent + 1);
      }
      out << '\n' << pad << ']';
      return;
    }
    case nlohmann::ordered_json::value_t::number_float: {
      const double x = j.get<double>();
      // JSON has no inf/nan; emit null.
      if (!std::isfinite(x)) {
        out << "null";
      } else {
        out << format_double(x);
      }
      return;
    }
    default:
      out << j.dump();
  }
}

}  // namespace detail

/// Pretty-printed JSON with insertion-ordered keys and every float written
/// with 17 significant digits, so equal documents serialize byte-identically.
inline std::string dump_json(const nlohmann::ordered_json& j) {
  std::ostringstream out;
  detail::write_json(out, j, 0);
  out << '\n';
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IOFailure, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IOFailure, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(Errc::IOFailure, "write to '" + path + "' failed");
}

}  // namespace pushsum
