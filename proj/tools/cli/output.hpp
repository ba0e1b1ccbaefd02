#pragma once

#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace perpetual::cli {

/// Shortest form with at most 10 significant digits, '.' decimal point,
/// independent of the locale.
std::string format_number(double v);

/// Empty cell, number or text.
using Cell = std::variant<std::monostate, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& out, const Table& t);
/// Array of row objects; empty cells and non-finite numbers become null.
void write_json(std::ostream& out, const Table& t);

/// Minimal streaming JSON writer with the number format above.
class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out) : out_(out) {}

  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);
  JsonWriter& value(const Cell& c);
  JsonWriter& value(const char* s) { return value(Cell{std::string(s)}); }
  JsonWriter& value(bool b);
  JsonWriter& field(const std::string& k, const Cell& c) { return key(k).value(c); }
  JsonWriter& field(const std::string& k, const char* s) { return key(k).value(s); }

 private:
  void separator();

  std::ostream& out_;
  std::vector<bool> first_;  // per open container: no element written yet
  bool after_key_ = false;
};

std::string json_escape(const std::string& s);

}  // namespace perpetual::cli
