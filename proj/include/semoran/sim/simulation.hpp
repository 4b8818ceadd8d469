#pragma once

#include "semoran/codec/pipeline.hpp"
#include "semoran/loc/localizer.hpp"
#include "semoran/sim/topology.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace semoran::sim {

std::string sha256_hex(std::span<const std::uint8_t> bytes);

enum class MessageKind : std::uint8_t { SEMANTIC_PAYLOAD, MODEL_DEPLOY, MODEL_ACK, LOC_RESULT, TELEMETRY, CONTROL };
std::string_view to_string(MessageKind kind);

enum class ModelKind : std::uint8_t { codec_amplitude, codec_phase, localizer };
std::string_view to_string(ModelKind kind);

struct ModelRegistryEntry {
  std::string model_id;
  std::uint64_t version = 0;
  ModelKind kind = ModelKind::codec_amplitude;
  std::string checksum;  // SHA-256 of the checkpoint bytes, hex
  std::uint64_t size_bytes = 0;
  std::set<NodeId> deployed_at;
};

class VersionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Model catalogue held in the O-Cloud knowledge base. Versions of one
/// model id strictly increase.
class ModelRegistry {
 public:
  /// Registers the next version (latest + 1) of `model_id`.
  const ModelRegistryEntry& publish(const std::string& model_id, ModelKind kind,
                                    std::span<const std::uint8_t> checkpoint);
  /// Registers an explicit version; throws VersionError unless it exceeds the latest.
  const ModelRegistryEntry& publish(const std::string& model_id, ModelKind kind, std::uint64_t version,
                                    std::span<const std::uint8_t> checkpoint);

  std::optional<std::uint64_t> latest(const std::string& model_id) const;
  const ModelRegistryEntry& get(const std::string& model_id, std::uint64_t version) const;
  bool verify(const ModelRegistryEntry& entry, std::span<const std::uint8_t> checkpoint) const;
  void mark_deployed(const std::string& model_id, std::uint64_t version, NodeId node);
  /// Every entry, grouped by model id in publication order.
  const std::map<std::string, std::vector<ModelRegistryEntry>>& entries() const { return entries_; }

 private:
  std::map<std::string, std::vector<ModelRegistryEntry>> entries_;
};

/// What a deployment installs at its target.
using ModelArtifact = std::variant<codec::HalfCodec, std::shared_ptr<const loc::LocalizerModel>>;

struct SimMessage {
  MessageKind kind = MessageKind::CONTROL;
  std::uint64_t payload_bytes = 0;
  std::uint64_t correlation_id = 0;
  std::vector<NodeId> hop_path;  // append-only

  std::vector<NodeId> route;  // planned path
  std::size_t route_pos = 0;

  // SEMANTIC_PAYLOAD content
  std::shared_ptr<const codec::SemanticPayload> semantic;
  std::shared_ptr<const Vector<float>> reconstruction;
  std::uint64_t encoder_amplitude_version = 0;
  std::uint64_t encoder_phase_version = 0;
  std::uint64_t sample_index = 0;
  bool decoded = false;

  // MODEL_DEPLOY / MODEL_ACK content
  std::optional<ModelRegistryEntry> model;
  std::shared_ptr<const ModelArtifact> artifact;
};

struct TraceEvent {
  SimTime time = 0;
  SimTime scheduled_at = 0;
  NodeId node = 0;
  std::string event;
  std::uint64_t correlation_id = 0;
  std::optional<std::size_t> link;  // index into the topology, for send events
  std::optional<NodeId> link_to;    // receiving end of a send
  std::optional<MessageKind> message;
  std::uint64_t bytes = 0;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

struct EventTrace {
  std::vector<TraceEvent> events;
  std::string digest;  // SHA-256 of the canonical JSON-lines text

  /// One JSON object per line with a fixed field order.
  std::string to_jsonl(const Topology& topo) const;
};

struct BandwidthFilter {
  std::optional<NodeId> from;  // restrict to one direction
  std::optional<MessageKind> kind;
};

/// Bytes carried by send events over the link joining a and b. Throws
/// TopologyError for a node pair without a link.
std::uint64_t bandwidth_report(const Topology& topo, const EventTrace& trace, NodeId a, NodeId b,
                               const BandwidthFilter& filter = {});

struct LocResult {
  std::uint64_t correlation_id = 0;
  std::uint64_t sample_index = 0;
  loc::Point position;
  SimTime time = 0;
  std::vector<NodeId> hop_path;
};

struct SimConfig {
  codec::ChannelConfig channel;  // AWGN on the UE -> O-RU hop
  /// Relocates semantic decoding from CU_SP to O_DU.
  bool enhanced_odu = false;
  /// Size of a MODEL_ACK message.
  std::uint64_t ack_bytes = 64;
};

/// Deterministic discrete-event simulation over a topology. Events are
/// ordered by (time, insertion order); handlers run to completion.
class Simulation {
 public:
  Simulation(Topology topology, SimConfig config);

  const Topology& topology() const { return topo_; }
  ModelRegistry& registry() { return registry_; }
  const ModelRegistry& registry() const { return registry_; }
  SimTime now() const { return now_; }

  /// Schedules a handler; throws std::logic_error for a time in the past.
  void schedule(SimTime at, std::function<void()> handler);

  /// Sends the registered model from the Semantic Engine to `target` over
  /// A1 / SRIC_DIRECT links (and the radio link for UEs). The target
  /// activates it on arrival and acknowledges. Throws VersionError when the
  /// version does not exceed what the target already has or has pending.
  std::uint64_t deploy_model(NodeId engine, NodeId target, const ModelRegistryEntry& entry,
                             ModelArtifact artifact, std::optional<SimTime> at = std::nullopt);

  /// Starts the remote localization flow for one CSI sample at `at` (default: now).
  std::uint64_t inject_localization_request(NodeId ue, const Eigen::Ref<const Vector<float>>& features,
                                            std::uint64_t sample_index, std::optional<SimTime> at = std::nullopt);

  /// Processes all events with time <= until; returns the cumulative trace.
  const EventTrace& run(SimTime until);
  const EventTrace& trace() const { return trace_; }

  /// Results keyed by correlation id.
  const std::map<std::uint64_t, LocResult>& results() const { return results_; }
  std::uint64_t total_bytes_sent() const { return bytes_sent_; }
  std::optional<std::uint64_t> active_version(NodeId node, ModelKind kind) const;
  bool idle() const { return queue_.empty(); }

 private:
  struct Pending {
    SimTime time;
    std::uint64_t seq;
    SimTime scheduled_at;
    std::function<void()> handler;
  };
  struct Later {
    bool operator()(const Pending& x, const Pending& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };
  struct ActiveModel {
    std::uint64_t version = 0;
    std::shared_ptr<const ModelArtifact> artifact;
  };

  void record(NodeId node, std::string event, std::uint64_t corr, nlohmann::ordered_json detail = {});
  void forward(SimMessage msg);
  void arrive(SimMessage msg, NodeId at, std::size_t link);
  void handle_semantic(SimMessage msg, NodeId at);
  void handle_deploy(SimMessage msg, NodeId at);
  void decode_at(SimMessage& msg, NodeId at);
  NodeId decode_node() const;
  std::vector<NodeId> localization_route() const;

  Topology topo_;
  SimConfig config_;
  ModelRegistry registry_;
  std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
  SimTime now_ = 0;
  SimTime current_scheduled_at_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t next_correlation_ = 1;
  std::uint64_t bytes_sent_ = 0;
  std::map<std::pair<NodeId, ModelKind>, ActiveModel> active_;
  std::map<std::pair<NodeId, ModelKind>, std::uint64_t> highest_;  // active or in flight
  std::map<std::uint64_t, LocResult> results_;
  EventTrace trace_;
  bool digest_stale_ = true;
};

}  // namespace semoran::sim
