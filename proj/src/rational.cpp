#include "ergo/rational.hpp"

namespace ergo {

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw ParseError("empty rational literal");
  for (char c : text) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '+')) {
      throw ParseError("bad rational literal '" + text + "'");
    }
  }
  mpq_class r;
  if (r.set_str(text, 10) != 0) {
    throw ParseError("bad rational literal '" + text + "'");
  }
  if (r.get_den() == 0) throw ParseError("zero denominator in '" + text + "'");
  r.canonicalize();
  return r;
}

std::string format_rational(const Rational& r) {
  return r.get_str();
}

}  // namespace ergo
