#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twa/logicsim.hpp"

namespace twa {

// Bit positions number the vector read as a binary word: bit 0 is the last
// declared input, bit width-1 the first. A field [hi, lo] is the usual
// word-slice notation, lo being the field's LSB.
struct FieldSpec {
  std::string name;
  int hi = 0;
  int lo = 0;
  std::vector<std::uint64_t> allowed;  // empty = unconstrained

  int width() const { return hi - lo + 1; }
};

struct ValidityPredicate {
  std::vector<FieldSpec> fields;

  bool empty() const { return fields.empty(); }
  // True when every constrained field's value is in its allowed set.
  // Throws WidthMismatch when a field range falls outside the vector.
  bool accepts(const InputVector& v) const;
};

std::uint64_t field_value(const InputVector& v, const FieldSpec& f);

// Accepts 0b..., 0x..., or decimal literals, underscores ignored.
std::uint64_t parse_uint_literal(const std::string& text);

ValidityPredicate parse_predicate(const std::string& json_text);
std::string serialize_predicate(const ValidityPredicate& p);

}  // namespace twa
