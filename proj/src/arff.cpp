#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rmlal/dataset.hpp"

namespace rmlal {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                        (s.front() == '"' && s.back() == '"'))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Splits on `sep` outside single/double quotes.
std::vector<std::string> split_respecting_quotes(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  for (char c : s) {
    if (quote != 0) {
      cur.push_back(c);
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      cur.push_back(c);
      quote = c;
    } else if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct Attribute {
  std::string name;
  bool nominal = false;
  std::vector<std::string> values;  // nominal values, declaration order
};

// Reads the attribute name from `rest` (quoted or bare token) and returns the
// remainder (the type specification).
std::pair<std::string, std::string> take_name(const std::string& rest, int line) {
  std::string t = trim(rest);
  if (t.empty()) throw parse_error("@attribute without a name", line);
  if (t.front() == '\'' || t.front() == '"') {
    const char quote = t.front();
    const std::size_t end = t.find(quote, 1);
    if (end == std::string::npos) throw parse_error("unterminated quoted attribute name", line);
    return {t.substr(1, end - 1), trim(t.substr(end + 1))};
  }
  const std::size_t sp = t.find_first_of(" \t");
  if (sp == std::string::npos) throw parse_error("@attribute without a type", line);
  return {t.substr(0, sp), trim(t.substr(sp + 1))};
}

Attribute parse_attribute(const std::string& rest, int line) {
  auto [name, type] = take_name(rest, line);
  Attribute attr;
  attr.name = name;
  if (type.empty()) throw parse_error("@attribute without a type", line);
  if (type.front() == '{') {
    if (type.back() != '}') throw parse_error("unterminated nominal specification", line);
    attr.nominal = true;
    for (const auto& v : split_respecting_quotes(type.substr(1, type.size() - 2), ',')) {
      attr.values.push_back(strip_quotes(trim(v)));
    }
    if (attr.values.empty()) throw parse_error("empty nominal specification", line);
    return attr;
  }
  const std::string kind = lower(type);
  if (kind == "numeric" || kind == "real" || kind == "integer") return attr;
  throw schema_error("unsupported attribute type '" + type + "' for attribute '" +
                     name + "'");
}

double parse_number(const std::string& raw, int line) {
  const std::string v = trim(raw);
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw parse_error("trailing characters in numeric value '" + v + "'", line);
    return x;
  } catch (const parse_error&) {
    throw;
  } catch (const std::exception&) {
    throw parse_error("cannot parse numeric value '" + v + "'", line);
  }
}

double attribute_value(const Attribute& attr, const std::string& raw, int line) {
  const std::string v = strip_quotes(trim(raw));
  if (v == "?") throw parse_error("missing value ('?') is not supported", line);
  if (!attr.nominal) return parse_number(v, line);
  const auto it = std::find(attr.values.begin(), attr.values.end(), v);
  if (it == attr.values.end()) {
    throw parse_error("value '" + v + "' not in nominal set of attribute '" + attr.name + "'", line);
  }
  return static_cast<double>(it - attr.values.begin());
}

// Label cells come from the literal token, not the nominal index: Mulan
// declares labels as {0,1} in either order.
int label_value(const Attribute& attr, const std::string& raw, int line) {
  const std::string v = strip_quotes(trim(raw));
  if (v == "0") return -1;
  if (v == "1") return +1;
  throw parse_error("label attribute '" + attr.name + "' has value '" + v +
                    "', expected 0 or 1", line);
}

std::string xml_unescape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const std::size_t semi = s.find(';', i);
    const std::string ent = semi == std::string::npos ? "" : s.substr(i, semi - i + 1);
    if (ent == "&amp;") out.push_back('&');
    else if (ent == "&lt;") out.push_back('<');
    else if (ent == "&gt;") out.push_back('>');
    else if (ent == "&quot;") out.push_back('"');
    else if (ent == "&apos;") out.push_back('\'');
    else { out.push_back(s[i]); continue; }
    i = semi;
  }
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> parse_label_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open label header file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string xml = buffer.str();

  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = xml.find("<label", pos)) != std::string::npos) {
    const std::size_t close = xml.find('>', pos);
    if (close == std::string::npos) break;
    const std::string tag = xml.substr(pos, close - pos);
    const std::size_t name_at = tag.find("name");
    if (name_at != std::string::npos) {
      const std::size_t q1 = tag.find_first_of("\"'", name_at);
      if (q1 != std::string::npos) {
        const std::size_t q2 = tag.find(tag[q1], q1 + 1);
        if (q2 != std::string::npos) {
          names.push_back(xml_unescape(tag.substr(q1 + 1, q2 - q1 - 1)));
        }
      }
    }
    pos = close + 1;
  }
  if (names.empty()) {
    throw schema_error("label header '" + path + "' declares no labels");
  }
  return names;
}

}  // namespace

MultiLabelDataset load_mulan_arff(const std::string& data_path,
                                  const std::string& label_header_path) {
  const std::vector<std::string> label_names = parse_label_header(label_header_path);

  std::ifstream in(data_path);
  if (!in) throw io_error("cannot open ARFF file '" + data_path + "'");

  std::string relation;
  std::vector<Attribute> attributes;
  std::vector<std::vector<double>> raw_rows;
  bool in_data = false;
  int line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '%') continue;

    if (!in_data && t.front() == '@') {
      const std::size_t sp = t.find_first_of(" \t");
      const std::string keyword = lower(sp == std::string::npos ? t : t.substr(0, sp));
      const std::string rest = sp == std::string::npos ? "" : trim(t.substr(sp + 1));
      if (keyword == "@relation") {
        relation = strip_quotes(rest);
      } else if (keyword == "@attribute") {
        attributes.push_back(parse_attribute(rest, line_no));
      } else if (keyword == "@data") {
        in_data = true;
      } else {
        throw parse_error("unknown ARFF declaration '" + keyword + "'", line_no);
      }
      continue;
    }

    if (!in_data) throw parse_error("data row before @data section", line_no);

    const int m = static_cast<int>(attributes.size());
    std::vector<double> row(static_cast<std::size_t>(m),
                            std::numeric_limits<double>::quiet_NaN());
    if (t.front() == '{') {
      // Sparse row: unmentioned attributes default to 0 (first nominal value).
      if (t.back() != '}') throw parse_error("unterminated sparse row", line_no);
      std::fill(row.begin(), row.end(), 0.0);
      const std::string body = trim(t.substr(1, t.size() - 2));
      if (!body.empty()) {
        for (const auto& cell : split_respecting_quotes(body, ',')) {
          const std::string entry = trim(cell);
          const std::size_t sp = entry.find_first_of(" \t");
          if (sp == std::string::npos) {
            throw parse_error("sparse entry '" + entry + "' lacks a value", line_no);
          }
          const int idx = static_cast<int>(parse_number(entry.substr(0, sp), line_no));
          if (idx < 0 || idx >= m) throw parse_error("sparse index out of range", line_no);
          row[static_cast<std::size_t>(idx)] =
              attribute_value(attributes[static_cast<std::size_t>(idx)],
                              entry.substr(sp + 1), line_no);
        }
      }
      raw_rows.push_back(std::move(row));
      continue;
    }

    const auto cells = split_respecting_quotes(t, ',');
    if (static_cast<int>(cells.size()) != m) {
      throw parse_error("row has " + std::to_string(cells.size()) + " values, expected " +
                        std::to_string(m), line_no);
    }
    for (int j = 0; j < m; ++j) {
      row[static_cast<std::size_t>(j)] =
          attribute_value(attributes[static_cast<std::size_t>(j)], cells[static_cast<std::size_t>(j)], line_no);
    }
    raw_rows.push_back(std::move(row));
  }

  if (!in_data) throw parse_error("ARFF file has no @data section", line_no);
  if (raw_rows.empty()) {
    throw empty_dataset_error("ARFF file '" + data_path + "' contains no instances");
  }

  // Column roles: any attribute named in the header file is a label column.
  std::unordered_set<std::string> label_set(label_names.begin(), label_names.end());
  if (label_set.size() != label_names.size()) {
    throw schema_error("duplicate label names in '" + label_header_path + "'");
  }
  std::unordered_map<std::string, int> attr_pos;
  for (int j = 0; j < static_cast<int>(attributes.size()); ++j) {
    attr_pos.emplace(attributes[static_cast<std::size_t>(j)].name, j);
  }
  for (const auto& name : label_names) {
    if (!attr_pos.count(name)) {
      throw schema_error("label '" + name + "' is not an attribute of '" + data_path + "'");
    }
  }

  std::vector<int> feature_cols;
  for (int j = 0; j < static_cast<int>(attributes.size()); ++j) {
    if (!label_set.count(attributes[static_cast<std::size_t>(j)].name)) feature_cols.push_back(j);
  }
  if (feature_cols.empty()) throw schema_error("dataset has no feature attributes");

  MultiLabelDataset ds;
  ds.name = relation.empty() ? data_path : relation;
  const int n = static_cast<int>(raw_rows.size());
  const int t_dim = static_cast<int>(feature_cols.size());
  const int c_dim = static_cast<int>(label_names.size());
  ds.features.resize(n, t_dim);
  ds.labels.resize(n, c_dim);
  for (int j = 0; j < t_dim; ++j) {
    ds.feature_names.push_back(attributes[static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(j)])].name);
  }
  ds.label_names = label_names;

  for (int i = 0; i < n; ++i) {
    const auto& row = raw_rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < t_dim; ++j) {
      ds.features(i, j) = row[static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(j)])];
    }
    for (int k = 0; k < c_dim; ++k) {
      const int col = attr_pos.at(label_names[static_cast<std::size_t>(k)]);
      const auto& attr = attributes[static_cast<std::size_t>(col)];
      const double v = row[static_cast<std::size_t>(col)];
      // Re-derive the literal token for nominal label columns; numeric label
      // columns must hold exactly 0 or 1.
      if (attr.nominal) {
        const auto& token = attr.values[static_cast<std::size_t>(v)];
        ds.labels(i, k) = label_value(attr, token, 0);
      } else if (v == 0.0) {
        ds.labels(i, k) = -1;
      } else if (v == 1.0) {
        ds.labels(i, k) = +1;
      } else {
        throw schema_error("numeric label column '" + attr.name + "' has value " +
                           std::to_string(v) + ", expected 0 or 1");
      }
    }
  }

  ds.validate();
  return ds;
}

void write_arff(const MultiLabelDataset& dataset, const std::string& data_path) {
  std::ofstream out(data_path);
  if (!out) throw io_error("cannot write ARFF file '" + data_path + "'");
  out << "@relation '" << dataset.name << "'\n\n";
  for (const auto& f : dataset.feature_names) {
    out << "@attribute '" << f << "' numeric\n";
  }
  for (const auto& l : dataset.label_names) {
    out << "@attribute '" << l << "' {0,1}\n";
  }
  out << "\n@data\n";
  char buf[64];
  for (int i = 0; i < dataset.n(); ++i) {
    for (int j = 0; j < dataset.t(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", dataset.features(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    for (int k = 0; k < dataset.c(); ++k) {
      out << ',' << (dataset.labels(i, k) > 0 ? '1' : '0');
    }
    out << '\n';
  }
  if (!out) throw io_error("failed while writing '" + data_path + "'");
}

void write_labels_xml(const MultiLabelDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write label header '" + path + "'");
  out << "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
  out << "<labels xmlns=\"http://mulan.sourceforge.net/labels\">\n";
  for (const auto& l : dataset.label_names) {
    out << "  <label name=\"" << xml_escape(l) << "\"></label>\n";
  }
  out << "</labels>\n";
  if (!out) throw io_error("failed while writing '" + path + "'");
}

MultiLabelDataset load_csv(const std::string& path, int label_count) {
  if (label_count < 2) throw config_error("CSV loader needs label_count >= 2");
  std::ifstream in(path);
  if (!in) throw io_error("cannot open CSV file '" + path + "'");

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw empty_dataset_error("CSV file '" + path + "' is empty");
  ++line_no;
  const auto header = split_respecting_quotes(trim(line), ',');
  const int m = static_cast<int>(header.size());
  if (m < label_count + 1) {
    throw schema_error("CSV header has " + std::to_string(m) + " columns, needs more than " +
                       std::to_string(label_count) + " label columns");
  }
  const int t_dim = m - label_count;

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto cells = split_respecting_quotes(t, ',');
    if (static_cast<int>(cells.size()) != m) {
      throw parse_error("row has " + std::to_string(cells.size()) + " values, expected " +
                        std::to_string(m), line_no);
    }
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(m));
    for (const auto& cell : cells) row.push_back(parse_number(cell, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw empty_dataset_error("CSV file '" + path + "' has no data rows");

  MultiLabelDataset ds;
  ds.name = path;
  const int n = static_cast<int>(rows.size());
  ds.features.resize(n, t_dim);
  ds.labels.resize(n, label_count);
  for (int j = 0; j < t_dim; ++j) ds.feature_names.push_back(strip_quotes(trim(header[static_cast<std::size_t>(j)])));
  for (int k = 0; k < label_count; ++k) {
    ds.label_names.push_back(strip_quotes(trim(header[static_cast<std::size_t>(t_dim + k)])));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < t_dim; ++j) ds.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    for (int k = 0; k < label_count; ++k) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(t_dim + k)];
      if (v == 0.0) ds.labels(i, k) = -1;
      else if (v == 1.0) ds.labels(i, k) = +1;
      else throw schema_error("CSV label column '" + ds.label_names[static_cast<std::size_t>(k)] +
                              "' has value " + std::to_string(v) + ", expected 0 or 1");
    }
  }
  ds.validate();
  return ds;
}

void write_csv(const MultiLabelDataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write CSV file '" + path + "'");
  for (int j = 0; j < dataset.t(); ++j) {
    if (j > 0) out << ',';
    out << dataset.feature_names[static_cast<std::size_t>(j)];
  }
  for (int k = 0; k < dataset.c(); ++k) out << ',' << dataset.label_names[static_cast<std::size_t>(k)];
  out << '\n';
  char buf[64];
  for (int i = 0; i < dataset.n(); ++i) {
    for (int j = 0; j < dataset.t(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", dataset.features(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    for (int k = 0; k < dataset.c(); ++k) out << ',' << (dataset.labels(i, k) > 0 ? '1' : '0');
    out << '\n';
  }
  if (!out) throw io_error("failed while writing '" + path + "'");
}

}  // namespace rmlal
