#include <charconv>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "schemas.hpp"

namespace pyramid::cli {

namespace {

using nlohmann::json;

const std::map<std::string, json, std::less<>>& schemas() {
  static const auto table = [] {
    std::map<std::string, json, std::less<>> m;
    for (const auto& [name, text] : detail::kSchemas) {
      m.emplace(std::string(name), json::parse(text));
    }
    return m;
  }();
  return table;
}

bool type_matches(const json& v, std::string_view type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  if (type == "number") return v.is_number();
  if (type == "integer") return v.is_number_integer();
  return false;
}

// Subset of JSON Schema used by the shipped schemas: type, enum, minimum,
// maximum, required, properties, additionalProperties=false, items and
// local $ref.
std::string check(const json& v, const json& schema, const json& root,
                  const std::string& where) {
  if (schema.contains("$ref")) {
    const std::string ref = schema["$ref"].get<std::string>();
    const std::string prefix = "#/$defs/";
    if (ref.rfind(prefix, 0) != 0) return where + ": unsupported $ref " + ref;
    return check(v, root.at("$defs").at(ref.substr(prefix.size())), root, where);
  }
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(v, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok |= type_matches(v, alt.get<std::string>());
    }
    if (!ok) return where + ": expected type " + t.dump();
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& e : schema["enum"]) ok |= e == v;
    if (!ok) return where + ": value not in " + schema["enum"].dump();
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>()) {
      return where + ": below minimum";
    }
    if (schema.contains("maximum") && x > schema["maximum"].get<double>()) {
      return where + ": above maximum";
    }
  }
  if (v.is_object()) {
    if (schema.contains("required")) {
      for (const auto& name : schema["required"]) {
        if (!v.contains(name.get<std::string>())) {
          return where + ": missing " + name.get<std::string>();
        }
      }
    }
    const json* props = schema.contains("properties") ? &schema["properties"] : nullptr;
    const bool closed = schema.value("additionalProperties", true) == false;
    for (const auto& [key, child] : v.items()) {
      if (props != nullptr && props->contains(key)) {
        auto e = check(child, (*props)[key], root, where + "." + key);
        if (!e.empty()) return e;
      } else if (closed) {
        return where + ": unexpected field " + key;
      }
    }
  }
  if (v.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto e = check(v[i], schema["items"], root, where + "[" + std::to_string(i) + "]");
      if (!e.empty()) return e;
    }
  }
  return {};
}

template <class T>
bool parse_int(std::string_view s, T& out) {
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && end == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string check_record_row(const std::vector<std::string_view>& f,
                             std::uint64_t expected_index) {
  if (f.size() != 6) return "expected 6 columns";
  std::uint64_t index = 0, online = 0, total = 0, wall = 0;
  int found = 0, level = 0;
  if (!parse_int(f[0], index) || index != expected_index) return "bad op_index";
  if (!parse_int(f[1], found) || (found != 0 && found != 1)) return "bad found";
  if (!parse_int(f[2], level) || level < -1) return "bad rebuilt_level";
  if (!parse_int(f[3], online)) return "bad online_buckets";
  if (!parse_int(f[4], total) || total < online) return "bad total_buckets";
  if (!parse_int(f[5], wall)) return "bad wall_ns";
  return {};
}

std::string check_cdf_row(const std::vector<std::string_view>& f,
                          std::uint64_t& prev_cumulative) {
  if (f.size() != 5) return "expected 5 columns";
  std::uint64_t total = 0, count = 0, cumulative = 0;
  int level = 0;
  if (!parse_int(f[0], total)) return "bad total_buckets";
  if (!parse_int(f[1], level) || level < -1) return "bad rebuilt_level";
  if (!parse_int(f[2], count) || count == 0) return "bad count";
  if (!parse_int(f[3], cumulative) || cumulative != prev_cumulative + count) {
    return "bad cumulative_count";
  }
  double fraction = 0.0;
  const auto [end, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), fraction);
  if (ec != std::errc{} || end != f[4].data() + f[4].size() || fraction < 0.0 ||
      fraction > 1.0) {
    return "bad cumulative_fraction";
  }
  prev_cumulative = cumulative;
  return {};
}

}  // namespace

std::string validate_json(std::string_view name, const nlohmann::json& doc) {
  const auto& all = schemas();
  const auto it = all.find(name);
  if (it == all.end()) return "no schema named " + std::string(name);
  return check(doc, it->second, it->second, std::string(name));
}

std::string validate_bench_csv(std::string_view text, bool cdf) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) return "missing header";
  if (line != (cdf ? kCdfHeader : kBenchHeader)) return "unexpected header: " + line;
  std::uint64_t row = 0;
  std::uint64_t cumulative = 0;
  while (std::getline(in, line)) {
    const auto fields = split(line);
    const std::string e =
        cdf ? check_cdf_row(fields, cumulative) : check_record_row(fields, row);
    if (!e.empty()) return "row " + std::to_string(row + 1) + ": " + e;
    ++row;
  }
  return {};
}

}  // namespace pyramid::cli
