#pragma once

#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace iflux {

// Minimal ordered JSON value for tool output. Numbers are emitted with 17
// significant digits so serialized runs are reproducible bit-for-bit.
class Json {
 public:
  using Array = std::vector<Json>;
  using Object = std::vector<std::pair<std::string, Json>>;

  Json() : v_(nullptr) {}
  Json(std::nullptr_t) : v_(nullptr) {}
  Json(bool b) : v_(b) {}
  Json(int i) : v_(static_cast<long long>(i)) {}
  Json(long long i) : v_(i) {}
  Json(double d) : v_(d) {}
  Json(const char* s) : v_(std::string(s)) {}
  Json(std::string s) : v_(std::move(s)) {}
  Json(Array a) : v_(std::move(a)) {}
  Json(Object o) : v_(std::move(o)) {}

  static Json object() { return Json(Object{}); }
  static Json array() { return Json(Array{}); }

  Json& set(const std::string& key, Json value) {
    std::get<Object>(v_).emplace_back(key, std::move(value));
    return *this;
  }
  Json& push(Json value) {
    std::get<Array>(v_).push_back(std::move(value));
    return *this;
  }

  void dump(std::ostream& os, int indent = 0, int depth = 0) const {
    std::visit(
        [&](const auto& val) {
          using T = std::decay_t<decltype(val)>;
          if constexpr (std::is_same_v<T, std::nullptr_t>) {
            os << "null";
          } else if constexpr (std::is_same_v<T, bool>) {
            os << (val ? "true" : "false");
          } else if constexpr (std::is_same_v<T, long long>) {
            os << val;
          } else if constexpr (std::is_same_v<T, double>) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", val);
            os << buf;
          } else if constexpr (std::is_same_v<T, std::string>) {
            dump_string(os, val);
          } else if constexpr (std::is_same_v<T, Array>) {
            dump_array(os, val, indent, depth);
          } else {
            dump_object(os, val, indent, depth);
          }
        },
        v_);
  }

  std::string str(int indent = 2) const {
    std::ostringstream os;
    dump(os, indent);
    os << "\n";
    return os.str();
  }

 private:
  static void dump_string(std::ostream& os, const std::string& s) {
    os << '"';
    for (char c : s) {
      switch (c) {
        case '"': os << "\\\""; break;
        case '\\': os << "\\\\"; break;
        case '\n': os << "\\n"; break;
        case '\t': os << "\\t"; break;
        case '\r': os << "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            os << buf;
          } else {
            os << c;
          }
      }
    }
    os << '"';
  }

  static void newline(std::ostream& os, int indent, int depth) {
    if (indent <= 0) return;
    os << '\n';
    for (int i = 0; i < indent * depth; ++i) os << ' ';
  }

  void dump_array(std::ostream& os, const Array& a, int indent, int depth) const {
    if (a.empty()) {
      os << "[]";
      return;
    }
    os << '[';
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) os << ',';
      newline(os, indent, depth + 1);
      a[i].dump(os, indent, depth + 1);
    }
    newline(os, indent, depth);
    os << ']';
  }

  void dump_object(std::ostream& os, const Object& o, int indent, int depth) const {
    if (o.empty()) {
      os << "{}";
      return;
    }
    os << '{';
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (i) os << ',';
      newline(os, indent, depth + 1);
      dump_string(os, o[i].first);
      os << (indent > 0 ? ": " : ":");
      o[i].second.dump(os, indent, depth + 1);
    }
    newline(os, indent, depth);
    os << '}';
  }

  std::variant<std::nullptr_t, bool, long long, double, std::string, Array, Object> v_;
};

}  // namespace iflux
