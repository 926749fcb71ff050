#include "twa/constraints.hpp"

#include <algorithm>
#include <cstdio>

#include "json.hpp"

namespace twa {

std::uint64_t field_value(const InputVector& v, const FieldSpec& f) {
  const int width = static_cast<int>(v.size());
  if (f.lo < 0 || f.hi < f.lo || f.hi >= width) {
    throw Error(ErrorCode::WidthMismatch,
                "field " + f.name + " [" + std::to_string(f.hi) + ":" + std::to_string(f.lo) +
                    "] outside a " + std::to_string(width) + "-bit vector");
  }
  std::uint64_t value = 0;
  for (int k = f.hi; k >= f.lo; --k) {
    value = (value << 1) | v[width - 1 - k];  // bit 0 is the last vector entry
  }
  return value;
}

bool ValidityPredicate::accepts(const InputVector& v) const {
  for (const auto& f : fields) {
    if (f.allowed.empty()) continue;
    std::uint64_t got = field_value(v, f);
    if (std::find(f.allowed.begin(), f.allowed.end(), got) == f.allowed.end()) return false;
  }
  return true;
}

std::uint64_t parse_uint_literal(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != '_') s.push_back(c);
  }
  if (s.empty()) throw Error(ErrorCode::SchemaError, "empty integer literal");
  int base = 10;
  std::size_t pos = 0;
  if (s.size() > 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B')) {
    base = 2;
    pos = 2;
  } else if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
    base = 16;
    pos = 2;
  }
  std::uint64_t value = 0;
  bool any = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    int digit;
    if (c >= '0' && c <= '9') digit = c - '0';
    else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
    else digit = -1;
    if (digit < 0 || digit >= base) {
      throw Error(ErrorCode::SchemaError, "bad integer literal '" + text + "'");
    }
    value = value * base + static_cast<std::uint64_t>(digit);
    any = true;
  }
  if (!any) throw Error(ErrorCode::SchemaError, "bad integer literal '" + text + "'");
  return value;
}

ValidityPredicate parse_predicate(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  ValidityPredicate p;
  if (j.is_null() || (j.is_object() && !j.contains("fields"))) return p;
  if (!j.is_object() || !j.at("fields").is_array()) {
    throw Error(ErrorCode::SchemaError, "predicate document needs a 'fields' array");
  }
  for (const auto& fj : j.at("fields")) {
    FieldSpec f;
    if (!fj.contains("name") || !fj.contains("bits")) {
      throw Error(ErrorCode::SchemaError, "predicate field needs 'name' and 'bits'");
    }
    f.name = fj.at("name").get<std::string>();
    const auto& bits = fj.at("bits");
    if (!bits.is_array() || bits.size() != 2) {
      throw Error(ErrorCode::SchemaError, "field " + f.name + " 'bits' must be [hi, lo]");
    }
    f.hi = bits[0].get<int>();
    f.lo = bits[1].get<int>();
    if (f.lo > f.hi || f.lo < 0) {
      throw Error(ErrorCode::SchemaError, "field " + f.name + " has an empty bit range");
    }
    if (fj.contains("allowed")) {
      for (const auto& a : fj.at("allowed")) {
        std::uint64_t value = a.is_string() ? parse_uint_literal(a.get<std::string>())
                                            : a.get<std::uint64_t>();
        if (f.width() < 64 && value >= (std::uint64_t{1} << f.width())) {
          throw Error(ErrorCode::SchemaError,
                      "allowed value does not fit field " + f.name);
        }
        f.allowed.push_back(value);
      }
    }
    p.fields.push_back(std::move(f));
  }
  return p;
}

std::string serialize_predicate(const ValidityPredicate& p) {
  nlohmann::ordered_json j;
  j["fields"] = nlohmann::ordered_json::array();
  for (const auto& f : p.fields) {
    nlohmann::ordered_json fj;
    fj["name"] = f.name;
    fj["bits"] = {f.hi, f.lo};
    fj["allowed"] = nlohmann::ordered_json::array();
    for (std::uint64_t a : f.allowed) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "0x%llX", static_cast<unsigned long long>(a));
      fj["allowed"].push_back(buf);
    }
    j["fields"].push_back(fj);
  }
  return j.dump(2) + "\n";
}

}  // namespace twa
