#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semoran::sim {

using NodeId = std::uint32_t;
/// Simulation time in integer microseconds.
using SimTime = std::int64_t;

enum class NodeKind : std::uint8_t {
  UE_EDGE,
  O_RU,
  O_DU,
  CU_CP,
  CU_UP,
  CU_SP,
  S_RIC,
  NEAR_RT_RIC,
  NON_RT_RIC,
  SEMANTIC_ENGINE,
  SMO,
  O_CLOUD_KB,
};
inline constexpr int kNodeKindCount = 12;

/// Logical interfaces. AIR (UE radio link) and F1 (DU-CU) complete the
/// paths that the architecture's named interfaces leave open.
enum class Interface : std::uint8_t {
  E2,
  A1,
  O1,
  O2,
  FRONTHAUL_72X,
  SRIC_DIRECT,
  XN_S,
  NG_S,
  X2_S,
  AIR,
  F1,
};
inline constexpr int kInterfaceCount = 11;

std::string_view to_string(NodeKind kind);
std::string_view to_string(Interface iface);
std::optional<NodeKind> node_kind_from_string(std::string_view s);
std::optional<Interface> interface_from_string(std::string_view s);

class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::UE_EDGE;
  std::string name;
};

struct LinkParams {
  SimTime latency_us = 0;
  std::uint64_t bandwidth_Bps = 1;
};

struct Link {
  NodeId a = 0;
  NodeId b = 0;
  Interface iface = Interface::E2;
  LinkParams params;

  bool joins(NodeId x, NodeId y) const { return (a == x && b == y) || (a == y && b == x); }
};

class Topology {
 public:
  NodeId add_node(NodeKind kind, std::string name = {});
  /// Rejects unknown endpoints, self links, duplicate node pairs and invalid parameters.
  std::size_t add_link(NodeId a, NodeId b, Interface iface, LinkParams params);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }
  const Node& node(NodeId id) const;
  std::optional<NodeId> find(NodeKind kind) const;
  NodeId require(NodeKind kind) const;
  std::optional<std::size_t> link_index(NodeId a, NodeId b) const;
  const Link& link(NodeId a, NodeId b) const;
  Link& link(NodeId a, NodeId b);

  /// Shortest hop path from `from` to `to` using only the allowed interfaces
  /// (all when empty). Ties resolve toward lower node ids.
  std::optional<std::vector<NodeId>> route(NodeId from, NodeId to,
                                           const std::vector<Interface>& allowed = {}) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
};

struct TopologyConfig {
  /// Per-interface defaults; see default_link_params().
  std::map<Interface, LinkParams> link_params;
  /// Semantic scenarios need the full semantic node set (CU_SP, S_RIC, engine).
  bool semantic = true;
  /// Node kinds to leave out, for negative tests of validation.
  std::vector<NodeKind> omit;

  static std::map<Interface, LinkParams> default_link_params();
};

/// The reference node set (one node per kind) and its logical links:
///   UE-O_RU (AIR), O_RU-O_DU (FRONTHAUL_72X), O_DU-CU_{CP,UP,SP} (F1),
///   S_RIC-{CU_SP, CU_CP, CU_UP, O_DU, O_RU, NEAR_RT_RIC} (SRIC_DIRECT),
///   SEMANTIC_ENGINE-{NON_RT_RIC, NEAR_RT_RIC, S_RIC} (A1), NON_RT_RIC-NEAR_RT_RIC (A1),
///   NEAR_RT_RIC-{CU_CP, CU_UP, O_DU} (E2), SMO-{NON_RT_RIC, SEMANTIC_ENGINE} (O1),
///   SMO-O_CLOUD_KB (O2).
Topology build_topology(const TopologyConfig& config = {});

/// Throws TopologyError if a required kind is missing or UE cannot reach NEAR_RT_RIC.
void validate_topology(const Topology& topo, bool semantic);

}  // namespace semoran::sim
