#ifndef ERGO_RULE_IO_HPP
#define ERGO_RULE_IO_HPP

#include <iosfwd>
#include <string>
#include <variant>

#include "ergo/rules.hpp"

namespace ergo {

// A rule as loaded from disk.  The numeric mode is part of the file and of
// the rule's identity; downstream commands dispatch on it.
using RuleVariant = std::variant<LocalRule<double>, LocalRule<Rational>>;

// Rule file format: a single JSON object with exactly the fields
//   alphabet_size, dimension, neighbourhood (ordered list of d-vectors),
//   mode ("rational" | "float"), table (rows in pattern-index order; rational
//   entries "p/q" strings, float entries numbers).
// Unknown fields are rejected.
RuleVariant parse_rule(const std::string& text);
RuleVariant load_rule(const std::string& path);

std::string serialize_rule(const LocalRule<double>& rule);
std::string serialize_rule(const LocalRule<Rational>& rule);
void save_rule(const std::string& path, const RuleVariant& rule);

bool is_rational_mode(const RuleVariant& rule);

}  // namespace ergo

#endif
