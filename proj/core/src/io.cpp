#include "flowrec/io.hpp"

#include "flowrec/error.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace flowrec::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> nonempty_lines(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find('\n', start);
    const std::string_view line =
        text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    ++number;
    if (!trim(line).empty()) out.push_back({number, line});
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

// Maps "kind,id" to the global component index.
class ComponentLookup {
 public:
  explicit ComponentLookup(const Network& net) : net_(net) {
    for (std::size_t v = 0; v < net.num_nodes(); ++v) nodes_.emplace(net.node_id(v), v);
    for (std::size_t e = 0; e < net.num_edges(); ++e) edges_.emplace(net.edge_label(e), e);
    for (std::size_t p = 0; p < net.num_paths(); ++p) paths_.emplace(net.path_label(p), p);
  }

  std::size_t find(std::size_t line, std::string_view kind_text, std::string_view id) const {
    const auto kind = parse_component_kind(kind_text);
    if (!kind) parse_error(line, "unknown component kind '" + std::string(kind_text) + "'");
    const auto& table = *kind == ComponentKind::Node   ? nodes_
                        : *kind == ComponentKind::Edge ? edges_
                                                       : paths_;
    const auto it = table.find(std::string(id));
    if (it == table.end()) {
      parse_error(line, "unknown " + std::string(kind_text) + " '" + std::string(id) + "'");
    }
    return net_.index().global(*kind, it->second);
  }

 private:
  const Network& net_;
  std::unordered_map<std::string, std::size_t> nodes_;
  std::unordered_map<std::string, std::size_t> edges_;
  std::unordered_map<std::string, std::size_t> paths_;
};

std::string kind_of(const Network& net, std::size_t global) {
  return std::string(to_string(net.index().locate(global).kind));
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "'" + std::string(text) + "' is not a number");
  }
  return value;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Network parse_network_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("network JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "network JSON must be an object");
    const auto nodes = doc.at("nodes").get<std::vector<std::string>>();
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw Error(ErrorCode::ParseError, "each edge must be a [tail, head] pair");
      }
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    const auto paths = doc.at("paths").get<std::vector<std::vector<std::size_t>>>();
    std::vector<NodeRole> roles;
    if (doc.contains("roles")) {
      roles.assign(nodes.size(), NodeRole::Unspecified);
      std::unordered_map<std::string, std::size_t> lookup;
      for (std::size_t i = 0; i < nodes.size(); ++i) lookup.emplace(nodes[i], i);
      for (const auto& [id, role_text] : doc.at("roles").items()) {
        const auto it = lookup.find(id);
        if (it == lookup.end()) {
          throw Error(ErrorCode::DanglingEdge, "role given for unknown node '" + id + "'");
        }
        const auto role = parse_node_role(role_text.get<std::string>());
        if (!role) {
          throw Error(ErrorCode::ParseError, "unknown role for node '" + id + "'");
        }
        roles[it->second] = *role;
      }
    }
    return Network::build(nodes, edges, paths, roles);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("network JSON: ") + e.what());
  }
}

std::string network_to_json(const Network& net) {
  json doc;
  doc["nodes"] = net.node_ids();
  json edges = json::array();
  for (const EdgeEnds& e : net.edges()) {
    edges.push_back({net.node_id(e.tail), net.node_id(e.head)});
  }
  doc["edges"] = std::move(edges);
  doc["paths"] = net.paths();
  if (net.has_roles()) {
    json roles = json::object();
    for (std::size_t v = 0; v < net.num_nodes(); ++v) {
      if (net.role(v) != NodeRole::Unspecified) {
        roles[net.node_id(v)] = std::string(to_string(net.role(v)));
      }
    }
    doc["roles"] = std::move(roles);
  }
  return doc.dump(2) + "\n";
}

Network read_network(const std::filesystem::path& path) {
  return parse_network_json(read_text(path));
}

void write_network(const Network& net, const std::filesystem::path& path) {
  write_text(path, network_to_json(net));
}

ForecastTable parse_forecast_csv(std::string_view text, const Network& net) {
  const auto lines = nonempty_lines(text);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "forecast file is empty");
  const auto header = split_fields(lines.front().text);
  if (header.size() < 3 || header[0] != "kind" || header[1] != "id") {
    parse_error(lines.front().number, "header must start with 'kind,id,' and name a value column");
  }
  ForecastTable table;
  const auto n = static_cast<Eigen::Index>(net.dimension());
  for (std::size_t c = 2; c < header.size(); ++c) {
    table.columns.emplace_back(header[c]);
    table.values.push_back(Vector::Zero(n));
  }
  const ComponentLookup lookup(net);
  std::vector<std::size_t> seen_line(net.dimension(), 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const auto fields = split_fields(line.text);
    if (fields.size() != header.size()) {
      parse_error(line.number, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(fields.size()));
    }
    const std::size_t g = lookup.find(line.number, fields[0], fields[1]);
    if (seen_line[g]) {
      throw Error(ErrorCode::DuplicateId, "line " + std::to_string(line.number) + ": " +
                                              std::string(fields[0]) + " '" +
                                              std::string(fields[1]) + "' already given on line " +
                                              std::to_string(seen_line[g]));
    }
    seen_line[g] = line.number;
    for (std::size_t c = 2; c < fields.size(); ++c) {
      double v = 0.0;
      try {
        v = parse_double(fields[c]);
      } catch (const Error& e) {
        parse_error(line.number, e.what());
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFinite, "line " + std::to_string(line.number) + ": " +
                                              std::string(fields[0]) + " '" +
                                              std::string(fields[1]) + "' is not finite");
      }
      table.values[c - 2][static_cast<Eigen::Index>(g)] = v;
    }
  }
  for (std::size_t g = 0; g < net.dimension(); ++g) {
    if (!seen_line[g]) {
      throw Error(ErrorCode::ParseError,
                  "missing " + kind_of(net, g) + " '" + net.component_id(g) + "'");
    }
  }
  return table;
}

ForecastTable read_forecast(const std::filesystem::path& path, const Network& net) {
  return parse_forecast_csv(read_text(path), net);
}

std::string forecast_to_csv(const Network& net, const ForecastTable& table) {
  std::string out = "kind,id";
  for (const auto& c : table.columns) out += "," + c;
  out += "\n";
  for (std::size_t g = 0; g < net.dimension(); ++g) {
    out += kind_of(net, g) + "," + net.component_id(g);
    for (const Vector& v : table.values) {
      out += "," + format_double(v[static_cast<Eigen::Index>(g)]);
    }
    out += "\n";
  }
  return out;
}

void write_forecast(const Network& net, const ForecastTable& table,
                    const std::filesystem::path& path) {
  write_text(path, forecast_to_csv(net, table));
}

Vector read_forecast_vector(const std::filesystem::path& path, const Network& net) {
  ForecastTable t = read_forecast(path, net);
  if (t.values.size() != 1) {
    throw Error(ErrorCode::ParseError, path.string() + ": expected a single value column");
  }
  return std::move(t.values.front());
}

void write_forecast_vector(const Network& net, const Vector& y,
                           const std::filesystem::path& path) {
  write_forecast(net, {{"value"}, {y}}, path);
}

BoxConstraints parse_box_csv(std::string_view text, const Network& net) {
  const auto lines = nonempty_lines(text);
  if (lines.empty()) throw Error(ErrorCode::ParseError, "box file is empty");
  const auto header = split_fields(lines.front().text);
  if (header.size() != 4 || header[0] != "kind" || header[1] != "id" || header[2] != "lower" ||
      header[3] != "upper") {
    parse_error(lines.front().number, "header must be 'kind,id,lower,upper'");
  }
  BoxConstraints box = BoxConstraints::unbounded(net.dimension());
  const ComponentLookup lookup(net);
  std::vector<bool> seen(net.dimension(), false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    const auto fields = split_fields(line.text);
    if (fields.size() != 4) parse_error(line.number, "expected 4 fields");
    const std::size_t g = lookup.find(line.number, fields[0], fields[1]);
    if (seen[g]) {
      throw Error(ErrorCode::DuplicateId, "line " + std::to_string(line.number) + ": " +
                                              std::string(fields[1]) + " listed twice");
    }
    seen[g] = true;
    try {
      if (!fields[2].empty()) box.lower[static_cast<Eigen::Index>(g)] = parse_double(fields[2]);
      if (!fields[3].empty()) box.upper[static_cast<Eigen::Index>(g)] = parse_double(fields[3]);
    } catch (const Error& e) {
      parse_error(line.number, e.what());
    }
  }
  box.validate(net.dimension());
  return box;
}

HierarchicalSeries parse_series_csv(std::string_view text, const Network& net) {
  const ForecastTable table = parse_forecast_csv(text, net);
  std::vector<std::int64_t> timestamps;
  for (const std::string& c : table.columns) {
    std::int64_t t = 0;
    const auto res = std::from_chars(c.data(), c.data() + c.size(), t);
    if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
      throw Error(ErrorCode::ParseError, "series column '" + c + "' is not an integer time");
    }
    timestamps.push_back(t);
  }
  return HierarchicalSeries(std::move(timestamps), table.values);
}

}  // namespace flowrec::io
