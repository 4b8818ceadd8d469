#include "semoran/sim/topology.hpp"

#include <algorithm>
#include <array>
#include <deque>

namespace semoran::sim {

namespace {

constexpr std::array<std::string_view, kNodeKindCount> kNodeNames = {
    "UE_EDGE", "O_RU",        "O_DU",       "CU_CP",           "CU_UP", "CU_SP",
    "S_RIC",   "NEAR_RT_RIC", "NON_RT_RIC", "SEMANTIC_ENGINE", "SMO",   "O_CLOUD_KB"};

constexpr std::array<std::string_view, kInterfaceCount> kInterfaceNames = {
    "E2", "A1", "O1", "O2", "FRONTHAUL_72X", "SRIC_DIRECT", "XN_S", "NG_S", "X2_S", "AIR", "F1"};

}  // namespace

std::string_view to_string(NodeKind kind) { return kNodeNames[static_cast<std::size_t>(kind)]; }
std::string_view to_string(Interface iface) { return kInterfaceNames[static_cast<std::size_t>(iface)]; }

std::optional<NodeKind> node_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNodeNames.size(); ++i)
    if (kNodeNames[i] == s) return static_cast<NodeKind>(i);
  return std::nullopt;
}

std::optional<Interface> interface_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kInterfaceNames.size(); ++i)
    if (kInterfaceNames[i] == s) return static_cast<Interface>(i);
  return std::nullopt;
}

NodeId Topology::add_node(NodeKind kind, std::string name) {
  const auto id = static_cast<NodeId>(nodes_.size());
  if (name.empty()) name = std::string(to_string(kind));
  nodes_.push_back({id, kind, std::move(name)});
  return id;
}

std::size_t Topology::add_link(NodeId a, NodeId b, Interface iface, LinkParams params) {
  if (a >= nodes_.size() || b >= nodes_.size()) throw TopologyError("link endpoint does not exist");
  if (a == b) throw TopologyError("link endpoints must differ");
  if (params.latency_us < 0) throw TopologyError("link latency must be non-negative");
  if (params.bandwidth_Bps == 0) throw TopologyError("link bandwidth must be positive");
  if (link_index(a, b))
    throw TopologyError("duplicate link " + nodes_[a].name + " - " + nodes_[b].name);
  links_.push_back({a, b, iface, params});
  return links_.size() - 1;
}

const Node& Topology::node(NodeId id) const {
  if (id >= nodes_.size()) throw TopologyError("unknown node id " + std::to_string(id));
  return nodes_[id];
}

std::optional<NodeId> Topology::find(NodeKind kind) const {
  for (const auto& n : nodes_)
    if (n.kind == kind) return n.id;
  return std::nullopt;
}

NodeId Topology::require(NodeKind kind) const {
  if (auto id = find(kind)) return *id;
  throw TopologyError("topology has no " + std::string(to_string(kind)) + " node");
}

std::optional<std::size_t> Topology::link_index(NodeId a, NodeId b) const {
  for (std::size_t i = 0; i < links_.size(); ++i)
    if (links_[i].joins(a, b)) return i;
  return std::nullopt;
}

const Link& Topology::link(NodeId a, NodeId b) const {
  if (auto i = link_index(a, b)) return links_[*i];
  throw TopologyError("no link between " + node(a).name + " and " + node(b).name);
}

Link& Topology::link(NodeId a, NodeId b) {
  if (auto i = link_index(a, b)) return links_[*i];
  throw TopologyError("no link between " + node(a).name + " and " + node(b).name);
}

std::optional<std::vector<NodeId>> Topology::route(NodeId from, NodeId to,
                                                   const std::vector<Interface>& allowed) const {
  node(from);
  node(to);
  auto usable = [&](const Link& l) {
    return allowed.empty() || std::find(allowed.begin(), allowed.end(), l.iface) != allowed.end();
  };
  std::vector<std::optional<NodeId>> parent(nodes_.size());
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<NodeId> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const NodeId cur = queue.front();
    queue.pop_front();
    if (cur == to) break;
    std::vector<NodeId> next;
    for (const auto& l : links_) {
      if (!usable(l)) continue;
      if (l.a == cur) next.push_back(l.b);
      else if (l.b == cur) next.push_back(l.a);
    }
    std::sort(next.begin(), next.end());
    for (NodeId n : next) {
      if (seen[n]) continue;
      seen[n] = true;
      parent[n] = cur;
      queue.push_back(n);
    }
  }
  if (!seen[to]) return std::nullopt;
  std::vector<NodeId> path{to};
  while (path.back() != from) path.push_back(*parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::map<Interface, LinkParams> TopologyConfig::default_link_params() {
  return {
      {Interface::AIR, {1'000, 12'500'000}},                // 100 Mbit/s radio link
      {Interface::FRONTHAUL_72X, {100, 3'125'000'000}},     // 25 Gbit/s
      {Interface::F1, {500, 1'250'000'000}},                // 10 Gbit/s
      {Interface::SRIC_DIRECT, {250, 1'250'000'000}},
      {Interface::E2, {2'000, 125'000'000}},
      {Interface::A1, {10'000, 125'000'000}},
      {Interface::O1, {10'000, 125'000'000}},
      {Interface::O2, {10'000, 125'000'000}},
      {Interface::XN_S, {5'000, 125'000'000}},
      {Interface::NG_S, {5'000, 125'000'000}},
      {Interface::X2_S, {5'000, 125'000'000}},
  };
}

void validate_topology(const Topology& topo, bool semantic) {
  std::vector<NodeKind> required{NodeKind::UE_EDGE, NodeKind::O_RU,   NodeKind::O_DU,
                                 NodeKind::CU_CP,   NodeKind::CU_UP,  NodeKind::NEAR_RT_RIC,
                                 NodeKind::NON_RT_RIC, NodeKind::SMO};
  if (semantic)
    required.insert(required.end(), {NodeKind::CU_SP, NodeKind::S_RIC, NodeKind::SEMANTIC_ENGINE,
                                     NodeKind::O_CLOUD_KB});
  for (auto k : required)
    if (!topo.find(k))
      throw TopologyError("topology is missing required node " + std::string(to_string(k)));
  if (!topo.route(topo.require(NodeKind::UE_EDGE), topo.require(NodeKind::NEAR_RT_RIC)))
    throw TopologyError("no path from UE_EDGE to NEAR_RT_RIC");
}

Topology build_topology(const TopologyConfig& config) {
  auto params = TopologyConfig::default_link_params();
  for (const auto& [iface, p] : config.link_params) params[iface] = p;

  Topology t;
  std::map<NodeKind, NodeId> id;
  for (int k = 0; k < kNodeKindCount; ++k) {
    const auto kind = static_cast<NodeKind>(k);
    if (std::find(config.omit.begin(), config.omit.end(), kind) != config.omit.end()) continue;
    id[kind] = t.add_node(kind);
  }
  auto connect = [&](NodeKind a, NodeKind b, Interface iface) {
    if (id.count(a) && id.count(b)) t.add_link(id[a], id[b], iface, params.at(iface));
  };
  using K = NodeKind;
  using I = Interface;
  connect(K::UE_EDGE, K::O_RU, I::AIR);
  connect(K::O_RU, K::O_DU, I::FRONTHAUL_72X);
  connect(K::O_DU, K::CU_CP, I::F1);
  connect(K::O_DU, K::CU_UP, I::F1);
  connect(K::O_DU, K::CU_SP, I::F1);
  connect(K::CU_SP, K::S_RIC, I::SRIC_DIRECT);
  connect(K::S_RIC, K::CU_CP, I::SRIC_DIRECT);
  connect(K::S_RIC, K::CU_UP, I::SRIC_DIRECT);
  connect(K::S_RIC, K::O_DU, I::SRIC_DIRECT);
  connect(K::S_RIC, K::O_RU, I::SRIC_DIRECT);
  connect(K::S_RIC, K::NEAR_RT_RIC, I::SRIC_DIRECT);
  connect(K::SEMANTIC_ENGINE, K::NON_RT_RIC, I::A1);
  connect(K::SEMANTIC_ENGINE, K::NEAR_RT_RIC, I::A1);
  connect(K::SEMANTIC_ENGINE, K::S_RIC, I::A1);
  connect(K::NON_RT_RIC, K::NEAR_RT_RIC, I::A1);
  connect(K::NEAR_RT_RIC, K::CU_CP, I::E2);
  connect(K::NEAR_RT_RIC, K::CU_UP, I::E2);
  connect(K::NEAR_RT_RIC, K::O_DU, I::E2);
  connect(K::SMO, K::NON_RT_RIC, I::O1);
  connect(K::SMO, K::SEMANTIC_ENGINE, I::O1);
  connect(K::SMO, K::O_CLOUD_KB, I::O2);

  validate_topology(t, config.semantic);
  return t;
}

}  // namespace semoran::sim
