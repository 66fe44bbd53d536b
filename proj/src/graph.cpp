#include "mbp/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mbp/error.hpp"
#include "mbp/rng.hpp"
#include "mbp/detail/format.hpp"

namespace mbp {

Graph::Graph(NodeId node_count, std::vector<Edge> edges, std::optional<GenerationMeta> meta)
    : node_count_(node_count), edges_(std::move(edges)), meta_(meta) {
  if (node_count_ < 0) throw InvalidArgument("graph: negative node count");
  for (auto& [a, b] : edges_) {
    if (a < 0 || b < 0 || a >= node_count_ || b >= node_count_) {
      throw InvalidArgument("graph: edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") out of range for n=" + std::to_string(node_count_));
    }
    if (a == b) throw InvalidArgument("graph: self-loop at node " + std::to_string(a));
    if (a > b) std::swap(a, b);
  }
  std::sort(edges_.begin(), edges_.end());
  if (auto dup = std::adjacent_find(edges_.begin(), edges_.end()); dup != edges_.end()) {
    throw InvalidArgument("graph: duplicate edge (" + std::to_string(dup->first) + "," +
                          std::to_string(dup->second) + ")");
  }

  std::vector<std::size_t> degree(static_cast<std::size_t>(node_count_), 0);
  for (const auto& [a, b] : edges_) {
    ++degree[a];
    ++degree[b];
  }
  offsets_.assign(static_cast<std::size_t>(node_count_) + 1, 0);
  for (NodeId v = 0; v < node_count_; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  adjacency_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& [a, b] : edges_) {
    adjacency_[cursor[a]++] = b;
    adjacency_[cursor[b]++] = a;
  }
  for (NodeId v = 0; v < node_count_; ++v) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
  }
}

bool Graph::has_edge(NodeId a, NodeId b) const noexcept {
  if (a < 0 || b < 0 || a >= node_count_ || b >= node_count_) return false;
  if (degree(a) > degree(b)) std::swap(a, b);
  const auto nbrs = neighbors(a);
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

Graph generate_er(NodeId n, double p, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("generate_er: n must be >= 2");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("generate_er: p must lie in [0, 1]");
  Xoshiro256 rng(seed);
  std::vector<Graph::Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (rng.uniform01() < p) edges.emplace_back(i, j);
    }
  }
  return Graph(n, std::move(edges), GenerationMeta{p, seed});
}

double density(const Graph& g) {
  const double n = g.node_count();
  if (n < 2) throw InvalidArgument("density: n must be >= 2");
  return 2.0 * static_cast<double>(g.edge_count()) / (n * (n - 1.0));
}

NodeId max_degree(const Graph& g) {
  NodeId best = 0;
  for (NodeId v = 0; v < g.node_count(); ++v) best = std::max(best, g.degree(v));
  return best;
}

Graph path_graph(NodeId n) {
  std::vector<Graph::Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Graph(n, std::move(edges));
}

Graph cycle_graph(NodeId n) {
  std::vector<Graph::Edge> edges;
  for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  if (n > 2) edges.emplace_back(0, n - 1);
  return Graph(n, std::move(edges));
}

Graph complete_graph(NodeId n) {
  std::vector<Graph::Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Graph(n, std::move(edges));
}

Graph star_graph(NodeId n) {
  std::vector<Graph::Edge> edges;
  for (NodeId i = 1; i < n; ++i) edges.emplace_back(0, i);
  return Graph(n, std::move(edges));
}

Graph empty_graph(NodeId n) { return Graph(n, {}); }

void write_edge_list(std::ostream& out, const Graph& g) {
  if (const auto& meta = g.meta()) {
    out << "# n=" << g.node_count() << " p=" << detail::format_double(meta->edge_probability)
        << " seed=" << meta->seed << '\n';
  }
  out << "p el " << g.node_count() << ' ' << g.edge_count() << '\n';
  for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

// Picks up `p=` and `seed=` from a comment line; other tokens are ignored.
void scan_meta_comment(const std::string& line, std::optional<double>& p,
                       std::optional<std::uint64_t>& seed) {
  std::istringstream tokens(line.substr(1));
  std::string token;
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string_view key(token.data(), eq);
    const std::string_view value(token.data() + eq + 1, token.size() - eq - 1);
    if (key == "p") {
      double v = 0;
      if (parse_number(value, v)) p = v;
    } else if (key == "seed") {
      std::uint64_t v = 0;
      if (parse_number(value, v)) seed = v;
    }
  }
}

}  // namespace

Graph read_edge_list(std::istream& in) {
  std::optional<double> p;
  std::optional<std::uint64_t> seed;
  std::optional<NodeId> n;
  std::int64_t expected_edges = 0;
  std::vector<Graph::Edge> edges;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      scan_meta_comment(line, p, seed);
      continue;
    }
    std::istringstream fields(line);
    if (!n) {
      std::string tag, kind, extra;
      std::int64_t nodes = -1, m = -1;
      if (!(fields >> tag >> kind >> nodes >> m) || tag != "p" || kind != "el" || nodes < 0 ||
          m < 0 || (fields >> extra)) {
        throw ParseError(line_no, "expected header 'p el <n> <m>'");
      }
      n = static_cast<NodeId>(nodes);
      expected_edges = m;
      edges.reserve(static_cast<std::size_t>(m));
      continue;
    }
    std::string a_text, b_text, extra;
    NodeId a = 0, b = 0;
    if (!(fields >> a_text >> b_text) || (fields >> extra) || !parse_number(a_text, a) ||
        !parse_number(b_text, b)) {
      throw ParseError(line_no, "expected edge '<i> <j>'");
    }
    if (a < 0 || b < 0 || a >= *n || b >= *n) throw ParseError(line_no, "node id out of range");
    if (a >= b) throw ParseError(line_no, "edge endpoints must satisfy i < j");
    edges.emplace_back(a, b);
  }
  if (!n) throw ParseError(line_no, "missing 'p el' header");
  if (static_cast<std::int64_t>(edges.size()) != expected_edges) {
    throw ParseError(line_no, "header declares " + std::to_string(expected_edges) +
                                  " edges, found " + std::to_string(edges.size()));
  }
  std::optional<GenerationMeta> meta;
  if (p && seed) meta = GenerationMeta{*p, *seed};
  try {
    return Graph(*n, std::move(edges), meta);
  } catch (const InvalidArgument& e) {
    throw ParseError(line_no, e.what());
  }
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_edge_list(out, g);
  if (!out) throw DataError("failed writing " + path.string());
}

Graph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_edge_list(in);
}

void require_even_order(const Graph& g) {
  if (g.node_count() < 2 || g.node_count() % 2 != 0) {
    throw InvalidArgument("bisection requires an even node count >= 2, got n=" +
                          std::to_string(g.node_count()));
  }
}

}  // namespace mbp
