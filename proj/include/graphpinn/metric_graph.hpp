#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace graphpinn {

using NodeId = int;

// Edge j is the interval (0, length); `tail` sits at x = 0, `head` at x = length.
struct Edge {
  int id = 0;
  NodeId tail = 0;
  NodeId head = 0;
  double length = 1.0;
};

enum class EndKind { AtZero, AtLength };

struct EdgeEnd {
  int edge = 0;
  EndKind end = EndKind::AtZero;

  friend bool operator==(const EdgeEnd&, const EdgeEnd&) = default;
};

// Finite metric graph. Immutable once constructed; boundary nodes are derived
// from incidences (degree one), never supplied.
class MetricGraph {
 public:
  MetricGraph(int num_nodes, std::vector<Edge> edges, std::map<NodeId, std::string> names = {});

  int num_nodes() const noexcept { return num_nodes_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(int id) const;
  const std::vector<NodeId>& boundary() const noexcept { return boundary_; }
  bool is_boundary(NodeId v) const;
  const std::map<NodeId, std::string>& names() const noexcept { return names_; }

  // Every (edge, end) touching v; a self-loop at v contributes both ends.
  const std::vector<EdgeEnd>& incident_edge_ends(NodeId v) const;
  int degree(NodeId v) const;

  // Coordinate of `end` on its edge (0 or the edge length).
  double coordinate(const EdgeEnd& end) const;

  // Text form accepted by load_graph.
  std::string serialize() const;

  friend bool operator==(const MetricGraph& a, const MetricGraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.names_ == b.names_ && a.same_edges(b);
  }

 private:
  void check_node(NodeId v) const;
  bool same_edges(const MetricGraph& other) const;

  int num_nodes_;
  std::vector<Edge> edges_;
  std::map<NodeId, std::string> names_;
  std::vector<std::vector<EdgeEnd>> incidence_;
  std::vector<NodeId> boundary_;
};

// Parses the graph file format:
//
//   # comment
//   nodes 4
//   edges
//     0, 0, 1, 1.0      # id, tail, head, length
//     ...
//   names               # optional
//     0 center
//
// Throws ParseError (with line number) or ValidationError.
MetricGraph load_graph(std::string_view text);
MetricGraph load_graph_file(const std::string& path);

}  // namespace graphpinn
