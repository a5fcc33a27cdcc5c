#include "graphpinn/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "graphpinn/error.hpp"

namespace graphpinn {

namespace {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

// Splits on whitespace and commas.
std::vector<std::string> tokenize(const std::string& line) {
  std::string cleaned = line;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

long parse_int(const std::string& tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    long v = std::stol(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("expected integer ") + what + ", got '" + tok + "'", line);
  }
}

double parse_real(const std::string& tok, int line, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("expected real ") + what + ", got '" + tok + "'", line);
  }
}

}  // namespace

MetricGraph::MetricGraph(int num_nodes, std::vector<Edge> edges, std::map<NodeId, std::string> names)
    : num_nodes_(num_nodes), edges_(std::move(edges)), names_(std::move(names)) {
  if (num_nodes_ <= 0) throw ValidationError("graph must have at least one node");
  if (edges_.empty()) throw ValidationError("graph must have at least one edge");
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
  incidence_.assign(static_cast<std::size_t>(num_nodes_), {});
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& e = edges_[k];
    if (e.id != static_cast<int>(k))
      throw ValidationError("edge ids must be dense 0.." + std::to_string(edges_.size() - 1) +
                            " without duplicates (found id " + std::to_string(e.id) + ")");
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw ValidationError("edge " + std::to_string(e.id) + " has non-positive length");
    for (NodeId v : {e.tail, e.head})
      if (v < 0 || v >= num_nodes_)
        throw ValidationError("edge " + std::to_string(e.id) + " references unknown node " +
                              std::to_string(v));
    incidence_[static_cast<std::size_t>(e.tail)].push_back({e.id, EndKind::AtZero});
    incidence_[static_cast<std::size_t>(e.head)].push_back({e.id, EndKind::AtLength});
  }
  for (NodeId v = 0; v < num_nodes_; ++v) {
    const auto& inc = incidence_[static_cast<std::size_t>(v)];
    if (inc.empty()) throw ValidationError("dangling node " + std::to_string(v) + " has no incident edge");
    if (inc.size() == 1) boundary_.push_back(v);
  }
  for (const auto& [id, name] : names_) {
    if (id < 0 || id >= num_nodes_) throw ValidationError("name given for unknown node " + std::to_string(id));
    if (name.empty() || name.find_first_of(" \t#,") != std::string::npos)
      throw ValidationError("node name for " + std::to_string(id) + " must be a single token");
  }
}

const Edge& MetricGraph::edge(int id) const {
  if (id < 0 || id >= num_edges()) throw std::out_of_range("unknown edge id " + std::to_string(id));
  return edges_[static_cast<std::size_t>(id)];
}

void MetricGraph::check_node(NodeId v) const {
  if (v < 0 || v >= num_nodes_) throw std::out_of_range("unknown node id " + std::to_string(v));
}

bool MetricGraph::is_boundary(NodeId v) const { return degree(v) == 1; }

const std::vector<EdgeEnd>& MetricGraph::incident_edge_ends(NodeId v) const {
  check_node(v);
  return incidence_[static_cast<std::size_t>(v)];
}

int MetricGraph::degree(NodeId v) const { return static_cast<int>(incident_edge_ends(v).size()); }

double MetricGraph::coordinate(const EdgeEnd& end) const {
  return end.end == EndKind::AtZero ? 0.0 : edge(end.edge).length;
}

bool MetricGraph::same_edges(const MetricGraph& other) const {
  if (edges_.size() != other.edges_.size()) return false;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& a = edges_[k];
    const Edge& b = other.edges_[k];
    if (a.id != b.id || a.tail != b.tail || a.head != b.head || a.length != b.length) return false;
  }
  return true;
}

std::string MetricGraph::serialize() const {
  std::ostringstream out;
  out << "nodes " << num_nodes_ << "\n";
  out << "edges\n";
  for (const Edge& e : edges_)
    out << "  " << e.id << ", " << e.tail << ", " << e.head << ", " << format_real(e.length) << "\n";
  if (!names_.empty()) {
    out << "names\n";
    for (const auto& [id, name] : names_) out << "  " << id << " " << name << "\n";
  }
  return out.str();
}

MetricGraph load_graph(std::string_view text) {
  enum class Section { None, Edges, Names } section = Section::None;
  int num_nodes = -1;
  std::vector<Edge> edges;
  std::map<NodeId, std::string> names;

  std::istringstream in{std::string(text)};
  int lineno = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++lineno;
    auto tok = tokenize(strip_comment(raw));
    if (tok.empty()) continue;

    if (tok[0] == "nodes") {
      if (tok.size() != 2) throw ParseError("'nodes' takes exactly one count", lineno);
      if (num_nodes >= 0) throw ParseError("duplicate 'nodes' section", lineno);
      num_nodes = static_cast<int>(parse_int(tok[1], lineno, "node count"));
      if (num_nodes <= 0) throw ParseError("node count must be positive", lineno);
      section = Section::None;
      continue;
    }
    if (tok[0] == "edges" || tok[0] == "names") {
      if (tok.size() != 1) throw ParseError("section header '" + tok[0] + "' takes no arguments", lineno);
      section = tok[0] == "edges" ? Section::Edges : Section::Names;
      continue;
    }

    switch (section) {
      case Section::Edges: {
        if (tok.size() != 4) throw ParseError("edge record needs 'id, tail, head, length'", lineno);
        Edge e;
        e.id = static_cast<int>(parse_int(tok[0], lineno, "edge id"));
        e.tail = static_cast<int>(parse_int(tok[1], lineno, "tail node"));
        e.head = static_cast<int>(parse_int(tok[2], lineno, "head node"));
        e.length = parse_real(tok[3], lineno, "edge length");
        if (!(e.length > 0.0)) throw ValidationError("line " + std::to_string(lineno) + ": edge " +
                                                     std::to_string(e.id) + " has non-positive length");
        edges.push_back(e);
        break;
      }
      case Section::Names: {
        if (tok.size() != 2) throw ParseError("name record needs 'id name'", lineno);
        auto id = static_cast<NodeId>(parse_int(tok[0], lineno, "node id"));
        if (!names.emplace(id, tok[1]).second) throw ParseError("duplicate name for node " + tok[0], lineno);
        break;
      }
      case Section::None:
        throw ParseError("unexpected '" + tok[0] + "' outside of a section", lineno);
    }
  }
  if (num_nodes < 0) throw ParseError("missing 'nodes' section");
  if (edges.empty()) throw ParseError("missing or empty 'edges' section");
  return MetricGraph(num_nodes, std::move(edges), std::move(names));
}

MetricGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_graph(buf.str());
}

}  // namespace graphpinn
