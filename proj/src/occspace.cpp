#include "laborscape/occspace.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include <json.hpp>

#include "laborscape/csv.hpp"
#include "laborscape/error.hpp"

namespace laborscape::occspace {

ProximityMatrix::ProximityMatrix(std::vector<OccupationId> occupations, std::vector<double> values)
    : occupations_(std::move(occupations)), values_(std::move(values)) {
  if (values_.size() != occupations_.size() * occupations_.size()) {
    throw Error(ErrorCode::InvalidArgument, "proximity matrix must be square");
  }
}

ProximityMatrix proximity(const metrics::RcaMatrix& rca, double advantage_cutoff) {
  const std::size_t n = rca.num_occupations();
  const std::size_t cities = rca.num_cities();
  std::vector<std::vector<std::size_t>> advantaged(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t m = 0; m < cities; ++m) {
      if (rca(m, j) >= advantage_cutoff) advantaged[j].push_back(m);
    }
  }
  std::vector<double> values(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& ci = advantaged[i];
      const auto& cj = advantaged[j];
      if (ci.empty() || cj.empty()) continue;
      std::size_t both = 0;
      auto a = ci.begin();
      auto b = cj.begin();
      while (a != ci.end() && b != cj.end()) {
        if (*a < *b) {
          ++a;
        } else if (*b < *a) {
          ++b;
        } else {
          ++both;
          ++a;
          ++b;
        }
      }
      double shared = static_cast<double>(both);
      double phi = std::min(shared / static_cast<double>(cj.size()),
                            shared / static_cast<double>(ci.size()));
      values[i * n + j] = phi;
      values[j * n + i] = phi;
    }
  }
  return ProximityMatrix(rca.occupations(), std::move(values));
}

std::string_view to_string(EdgeTag tag) noexcept {
  return tag == EdgeTag::Mst ? "mst" : "threshold";
}

OccupationNetwork::OccupationNetwork(std::vector<OccupationId> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), adjacency_(nodes_.size()) {
  for (auto& e : edges_) {
    if (e.a > e.b) std::swap(e.a, e.b);
    if (e.b >= nodes_.size() || e.a == e.b) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range or self loop");
    }
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].a == edges_[i - 1].a && edges_[i].b == edges_[i - 1].b) {
      throw Error(ErrorCode::DuplicateKey, "duplicate edge " + nodes_[edges_[i].a].code + " - " +
                                               nodes_[edges_[i].b].code);
    }
  }
  for (const auto& e : edges_) {
    adjacency_[e.a].push_back(e.b);
    adjacency_[e.b].push_back(e.a);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

std::size_t OccupationNetwork::node_index(std::string_view code) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].code == code) return i;
  }
  throw Error(ErrorCode::UnknownId, "occupation '" + std::string(code) + "' not in network");
}

std::size_t OccupationNetwork::count(EdgeTag tag) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [tag](const Edge& e) { return e.tag == tag; }));
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace

OccupationNetwork build_network(const ProximityMatrix& prox, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "proximity threshold must lie in [0,1]");
  }
  const auto& nodes = prox.occupations();
  const std::size_t n = prox.size();

  struct Candidate {
    std::size_t a, b;
    double weight;
    const std::string* lo;
    const std::string* hi;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double w = prox(i, j);
      if (w <= 0.0) continue;
      const std::string* ci = &nodes[i].code;
      const std::string* cj = &nodes[j].code;
      if (*cj < *ci) std::swap(ci, cj);
      candidates.push_back({i, j, w, ci, cj});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (*x.lo != *y.lo) return *x.lo < *y.lo;
    return *x.hi < *y.hi;
  });

  DisjointSets forest(n);
  std::vector<Edge> edges;
  std::vector<bool> in_tree(candidates.size(), false);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (forest.unite(candidates[c].a, candidates[c].b)) {
      edges.push_back({candidates[c].a, candidates[c].b, candidates[c].weight, EdgeTag::Mst});
      in_tree[c] = true;
    }
  }
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (!in_tree[c] && candidates[c].weight > threshold) {
      edges.push_back({candidates[c].a, candidates[c].b, candidates[c].weight, EdgeTag::Threshold});
    }
  }
  return OccupationNetwork(nodes, std::move(edges));
}

std::vector<double> closeness(const OccupationNetwork& net) {
  const std::size_t n = net.nodes().size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const auto& adj = net.adjacency();
  std::vector<std::size_t> dist(n);
  constexpr auto kUnseen = static_cast<std::size_t>(-1);
  for (std::size_t v = 0; v < n; ++v) {
    std::fill(dist.begin(), dist.end(), kUnseen);
    dist[v] = 0;
    std::queue<std::size_t> frontier;
    frontier.push(v);
    std::size_t reached = 0;
    std::size_t total = 0;
    while (!frontier.empty()) {
      auto u = frontier.front();
      frontier.pop();
      for (auto w : adj[u]) {
        if (dist[w] != kUnseen) continue;
        dist[w] = dist[u] + 1;
        ++reached;
        total += dist[w];
        frontier.push(w);
      }
    }
    if (reached == 0) continue;
    double r1 = static_cast<double>(reached);
    out[v] = (r1 / static_cast<double>(n - 1)) * (r1 / static_cast<double>(total));
  }
  return out;
}

CityOverlay overlay(const OccupationNetwork& net, const metrics::RcaMatrix& rca,
                    std::span<const double> closeness_values, std::string_view city,
                    double advantage_cutoff) {
  if (closeness_values.size() != net.nodes().size()) {
    throw Error(ErrorCode::InvalidArgument, "closeness vector does not match network nodes");
  }
  auto m = rca.require_city(city);
  std::vector<std::size_t> nodes;
  for (std::size_t j = 0; j < rca.num_occupations(); ++j) {
    if (rca(m, j) >= advantage_cutoff) nodes.push_back(net.node_index(rca.occupations()[j].code));
  }
  if (nodes.empty()) {
    throw Error(ErrorCode::NoAdvantagedOccupations,
                "city '" + std::string(city) + "' has no occupation with RCA >= " +
                    format_double(advantage_cutoff));
  }
  std::sort(nodes.begin(), nodes.end());
  CityOverlay out;
  out.city = std::string(city);
  double sum = 0.0;
  for (auto v : nodes) {
    out.advantaged.push_back(net.nodes()[v].code);
    sum += closeness_values[v];
  }
  out.position = sum / static_cast<double>(nodes.size());
  return out;
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "edgelist") return ExportFormat::Edgelist;
  if (name == "graph-xml" || name == "graphml") return ExportFormat::GraphXml;
  if (name == "json") return ExportFormat::Json;
  throw Error(ErrorCode::InvalidArgument,
              "unknown export format '" + std::string(name) + "' (edgelist, graph-xml, json)");
}

std::string edgelist_text(const OccupationNetwork& net) {
  std::string out;
  for (const auto& e : net.edges()) {
    out += net.nodes()[e.a].code + " " + net.nodes()[e.b].code + " " + format_double(e.weight) +
           " " + std::string(to_string(e.tag)) + "\n";
  }
  return out;
}

namespace {

std::string risk_cell(const RiskTable& risk, const std::string& code) {
  auto p = risk.find(code);
  return p ? format_double(*p) : std::string();
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string nodes_csv(const OccupationNetwork& net, std::span<const double> closeness_values,
                      const RiskTable& risk) {
  std::string out = "code,label,closeness,risk\n";
  for (std::size_t i = 0; i < net.nodes().size(); ++i) {
    const auto& node = net.nodes()[i];
    out += csv_line({node.code, node.label, format_double(closeness_values[i]),
                     risk_cell(risk, node.code)});
  }
  return out;
}

std::string network_json(const OccupationNetwork& net, std::span<const double> closeness_values,
                         const RiskTable& risk) {
  nlohmann::ordered_json doc;
  doc["nodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < net.nodes().size(); ++i) {
    const auto& node = net.nodes()[i];
    nlohmann::ordered_json j;
    j["code"] = node.code;
    j["label"] = node.label;
    j["closeness"] = closeness_values[i];
    if (auto p = risk.find(node.code)) {
      j["risk"] = *p;
    } else {
      j["risk"] = nullptr;
    }
    doc["nodes"].push_back(std::move(j));
  }
  doc["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : net.edges()) {
    nlohmann::ordered_json j;
    j["source"] = net.nodes()[e.a].code;
    j["target"] = net.nodes()[e.b].code;
    j["weight"] = e.weight;
    j["tag"] = std::string(to_string(e.tag));
    doc["edges"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string network_graphml(const OccupationNetwork& net, std::span<const double> closeness_values,
                            const RiskTable& risk) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
      "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
      "  <key id=\"closeness\" for=\"node\" attr.name=\"closeness\" attr.type=\"double\"/>\n"
      "  <key id=\"risk\" for=\"node\" attr.name=\"risk\" attr.type=\"double\"/>\n"
      "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
      "  <key id=\"tag\" for=\"edge\" attr.name=\"tag\" attr.type=\"string\"/>\n"
      "  <graph id=\"occupation_space\" edgedefault=\"undirected\">\n";
  for (std::size_t i = 0; i < net.nodes().size(); ++i) {
    const auto& node = net.nodes()[i];
    out += "    <node id=\"" + xml_escape(node.code) + "\">\n";
    out += "      <data key=\"label\">" + xml_escape(node.label) + "</data>\n";
    out += "      <data key=\"closeness\">" + format_double(closeness_values[i]) + "</data>\n";
    if (auto p = risk.find(node.code)) {
      out += "      <data key=\"risk\">" + format_double(*p) + "</data>\n";
    }
    out += "    </node>\n";
  }
  for (const auto& e : net.edges()) {
    out += "    <edge source=\"" + xml_escape(net.nodes()[e.a].code) + "\" target=\"" +
           xml_escape(net.nodes()[e.b].code) + "\">\n";
    out += "      <data key=\"weight\">" + format_double(e.weight) + "</data>\n";
    out += "      <data key=\"tag\">" + std::string(to_string(e.tag)) + "</data>\n";
    out += "    </edge>\n";
  }
  out += "  </graph>\n</graphml>\n";
  return out;
}

std::vector<std::filesystem::path> export_network(const OccupationNetwork& net,
                                                  std::span<const double> closeness_values,
                                                  const RiskTable& risk,
                                                  const std::filesystem::path& path,
                                                  ExportFormat format) {
  if (closeness_values.size() != net.nodes().size()) {
    throw Error(ErrorCode::InvalidArgument, "closeness vector does not match network nodes");
  }
  switch (format) {
    case ExportFormat::Edgelist: {
      auto sidecar = path.parent_path() / (path.stem().string() + ".nodes.csv");
      write_file_atomic(path, edgelist_text(net));
      write_file_atomic(sidecar, nodes_csv(net, closeness_values, risk));
      return {path, sidecar};
    }
    case ExportFormat::GraphXml:
      write_file_atomic(path, network_graphml(net, closeness_values, risk));
      return {path};
    case ExportFormat::Json:
      write_file_atomic(path, network_json(net, closeness_values, risk));
      return {path};
  }
  return {};
}

}  // namespace laborscape::occspace
