#include "ergo/rule_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ergo {

namespace {

using nlohmann::json;

Neighbourhood parse_neighbourhood(const json& j, int dimension) {
  if (!j.is_array() || j.empty()) throw ParseError("neighbourhood must be a nonempty list");
  std::vector<Site> offsets;
  for (const auto& off : j) {
    if (!off.is_array() || static_cast<int>(off.size()) != dimension)
      throw ParseError("neighbourhood offsets must be d-vectors");
    Site s;
    for (const auto& c : off) {
      if (!c.is_number_integer()) throw ParseError("neighbourhood coordinates must be integers");
      s.push_back(c.get<int>());
    }
    offsets.push_back(std::move(s));
  }
  return Neighbourhood(dimension, std::move(offsets));
}

template <class T>
LocalRule<T> parse_table(const json& table, int alphabet, Neighbourhood nb) {
  if (!table.is_array()) throw ParseError("table must be a list of rows");
  std::vector<std::vector<T>> rows;
  rows.reserve(table.size());
  for (const auto& row : table) {
    if (!row.is_array() || static_cast<int>(row.size()) != alphabet)
      throw ParseError("each table row must have sigma entries");
    std::vector<T> r;
    r.reserve(row.size());
    for (const auto& e : row) {
      if constexpr (is_rational_v<T>) {
        if (!e.is_string()) throw ParseError("rational mode entries must be \"p/q\" strings");
        r.push_back(parse_rational(e.get<std::string>()));
      } else {
        if (!e.is_number()) throw ParseError("float mode entries must be numbers");
        r.push_back(e.get<double>());
      }
    }
    rows.push_back(std::move(r));
  }
  LocalRule<T> rule(alphabet, std::move(nb), std::move(rows));
  const auto report = validate_rule(rule);
  if (!report.ok()) {
    throw ParseError("rule table invalid: row " + std::to_string(report.issues[0].row) +
                     ": " + report.issues[0].what);
  }
  return rule;
}

}  // namespace

RuleVariant parse_rule(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("rule file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("rule file must be a single object");

  static const char* known[] = {"alphabet_size", "dimension", "neighbourhood", "mode", "table"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ParseError("unknown rule file field '" + it.key() + "'");
  }
  for (const char* k : known) {
    if (!j.contains(k)) throw ParseError(std::string("missing rule file field '") + k + "'");
  }

  if (!j["alphabet_size"].is_number_integer()) throw ParseError("alphabet_size must be an integer");
  if (!j["dimension"].is_number_integer()) throw ParseError("dimension must be an integer");
  const int alphabet = j["alphabet_size"].get<int>();
  const int dimension = j["dimension"].get<int>();
  if (alphabet < 2) throw ParseError("alphabet_size must be >= 2");
  if (dimension < 1) throw ParseError("dimension must be >= 1");
  Neighbourhood nb = parse_neighbourhood(j["neighbourhood"], dimension);

  if (!j["mode"].is_string()) throw ParseError("mode must be \"rational\" or \"float\"");
  const std::string mode = j["mode"].get<std::string>();
  if (mode == "rational") {
    return parse_table<Rational>(j["table"], alphabet, std::move(nb));
  }
  if (mode == "float") {
    return parse_table<double>(j["table"], alphabet, std::move(nb));
  }
  throw ParseError("mode must be \"rational\" or \"float\"");
}

RuleVariant load_rule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open rule file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rule(buf.str());
}

namespace {

template <class T>
std::string serialize_impl(const LocalRule<T>& rule, const char* mode) {
  json j;
  j["alphabet_size"] = rule.alphabet();
  j["dimension"] = rule.dimension();
  json nb = json::array();
  for (const Site& o : rule.neighbourhood().offsets()) nb.push_back(o);
  j["neighbourhood"] = nb;
  j["mode"] = mode;
  json table = json::array();
  for (std::size_t r = 0; r < rule.rows(); ++r) {
    json row = json::array();
    for (int b = 0; b < rule.alphabet(); ++b) {
      if constexpr (is_rational_v<T>) {
        row.push_back(format_rational(rule.entry(r, b)));
      } else {
        row.push_back(rule.entry(r, b));
      }
    }
    table.push_back(row);
  }
  j["table"] = table;
  return j.dump(2) + "\n";
}

}  // namespace

std::string serialize_rule(const LocalRule<double>& rule) {
  return serialize_impl(rule, "float");
}

std::string serialize_rule(const LocalRule<Rational>& rule) {
  return serialize_impl(rule, "rational");
}

void save_rule(const std::string& path, const RuleVariant& rule) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  std::visit([&](const auto& r) { out << serialize_rule(r); }, rule);
}

bool is_rational_mode(const RuleVariant& rule) {
  return std::holds_alternative<LocalRule<Rational>>(rule);
}

}  // namespace ergo
