#pragma once

// Minimal sectioned `key = value` document with line tracking, used for
// run configs, the benchmark table, and model weight files.
//
//   # comment
//   [section]
//   key = value
//   matrix = 1 2 3
//            4 5 6      <- indented lines continue the previous value

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "reach/errors.hpp"

namespace reach {

struct KvEntry {
  std::string value;
  std::size_t line = 0;
};

class KvDocument {
 public:
  using Section = std::map<std::string, KvEntry>;

  static KvDocument parse(std::istream& in, const std::string& source) {
    KvDocument doc;
    doc.source_ = source;
    std::string current;
    doc.sections_[current];
    doc.order_.push_back(current);
    KvEntry* last = nullptr;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
      const bool indented = !line.empty() && (line[0] == ' ' || line[0] == '\t');
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ParseError(source, line_no, "unterminated section header");
        current = trim(line.substr(1, line.size() - 2));
        if (current.empty()) throw ParseError(source, line_no, "empty section name");
        if (doc.sections_.count(current) != 0 && current != "") {
          throw ParseError(source, line_no, "duplicate section [" + current + "]");
        }
        doc.sections_[current];
        doc.order_.push_back(current);
        last = nullptr;
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        if (indented && last != nullptr) {
          last->value += " " + line;
          continue;
        }
        throw ParseError(source, line_no, "expected 'key = value'");
      }
      std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ParseError(source, line_no, "missing key before '='");
      auto& sec = doc.sections_[current];
      if (sec.count(key) != 0) throw ParseError(source, line_no, "duplicate key '" + key + "'");
      sec[key] = KvEntry{trim(line.substr(eq + 1)), line_no};
      last = &sec[key];
    }
    return doc;
  }

  static KvDocument parse_string(const std::string& text, const std::string& source = "<string>") {
    std::istringstream in(text);
    return parse(in, source);
  }

  static KvDocument load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return parse(in, path);
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& section_names() const { return order_; }

  bool has_section(const std::string& section) const { return sections_.count(section) != 0; }

  const Section& section(const std::string& name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw ParseError(source_, 0, "missing section [" + name + "]");
    return it->second;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) != 0;
  }

  const KvEntry& entry(const std::string& section, const std::string& key) const {
    const auto& sec = this->section(section);
    auto it = sec.find(key);
    if (it == sec.end()) {
      throw ParseError(source_, 0, "missing key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    }
    return it->second;
  }

  std::string string(const std::string& section, const std::string& key) const { return entry(section, key).value; }

  std::string string_or(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? string(section, key) : fallback;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    return parse_numbers(e.value, source_, e.line);
  }

  double number(const std::string& section, const std::string& key) const {
    const auto v = numbers(section, key);
    if (v.size() != 1) throw ParseError(source_, entry(section, key).line, "expected a single number for '" + key + "'");
    return v.front();
  }

  double number_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
  }

  long long integer(const std::string& section, const std::string& key) const {
    const auto& e = entry(section, key);
    const auto v = number(section, key);
    if (v != static_cast<double>(static_cast<long long>(v))) throw ParseError(source_, e.line, "expected an integer for '" + key + "'");
    return static_cast<long long>(v);
  }

  long long integer_or(const std::string& section, const std::string& key, long long fallback) const {
    return has(section, key) ? integer(section, key) : fallback;
  }

  std::size_t line_of(const std::string& section, const std::string& key) const { return entry(section, key).line; }

  // Decimal numbers separated by whitespace and/or commas.
  static std::vector<double> parse_numbers(const std::string& text, const std::string& source, std::size_t line) {
    std::vector<double> out;
    std::string token;
    auto flush = [&]() {
      if (token.empty()) return;
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw ParseError(source, line, "expected a number, got '" + token + "'");
      }
      out.push_back(v);
      token.clear();
    };
    for (char ch : text) {
      if (ch == ',' || ch == ' ' || ch == '\t') {
        flush();
      } else {
        token.push_back(ch);
      }
    }
    flush();
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

 private:
  std::string source_;
  std::map<std::string, Section> sections_;
  std::vector<std::string> order_;
};

}  // namespace reach
