#include "semoran/sim/simulation.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace semoran::sim {

using nlohmann::ordered_json;

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::SEMANTIC_PAYLOAD: return "SEMANTIC_PAYLOAD";
    case MessageKind::MODEL_DEPLOY: return "MODEL_DEPLOY";
    case MessageKind::MODEL_ACK: return "MODEL_ACK";
    case MessageKind::LOC_RESULT: return "LOC_RESULT";
    case MessageKind::TELEMETRY: return "TELEMETRY";
    case MessageKind::CONTROL: return "CONTROL";
  }
  return "?";
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::codec_amplitude: return "codec_amplitude";
    case ModelKind::codec_phase: return "codec_phase";
    case ModelKind::localizer: return "localizer";
  }
  return "?";
}

// ---- registry

const ModelRegistryEntry& ModelRegistry::publish(const std::string& model_id, ModelKind kind,
                                                 std::span<const std::uint8_t> checkpoint) {
  return publish(model_id, kind, latest(model_id).value_or(0) + 1, checkpoint);
}

const ModelRegistryEntry& ModelRegistry::publish(const std::string& model_id, ModelKind kind,
                                                 std::uint64_t version,
                                                 std::span<const std::uint8_t> checkpoint) {
  if (model_id.empty()) throw std::invalid_argument("model id must not be empty");
  if (version == 0) throw VersionError("model versions start at 1");
  auto& list = entries_[model_id];
  if (!list.empty()) {
    if (list.back().kind != kind) throw std::invalid_argument("model " + model_id + " changes kind");
    if (version <= list.back().version)
      throw VersionError("model " + model_id + " version " + std::to_string(version) +
                         " does not exceed " + std::to_string(list.back().version));
  }
  ModelRegistryEntry e;
  e.model_id = model_id;
  e.version = version;
  e.kind = kind;
  e.checksum = sha256_hex(checkpoint);
  e.size_bytes = checkpoint.size();
  list.push_back(std::move(e));
  return list.back();
}

std::optional<std::uint64_t> ModelRegistry::latest(const std::string& model_id) const {
  auto it = entries_.find(model_id);
  if (it == entries_.end() || it->second.empty()) return std::nullopt;
  return it->second.back().version;
}

const ModelRegistryEntry& ModelRegistry::get(const std::string& model_id, std::uint64_t version) const {
  auto it = entries_.find(model_id);
  if (it != entries_.end())
    for (const auto& e : it->second)
      if (e.version == version) return e;
  throw std::out_of_range("no registered model " + model_id + " v" + std::to_string(version));
}

bool ModelRegistry::verify(const ModelRegistryEntry& entry, std::span<const std::uint8_t> checkpoint) const {
  return entry.size_bytes == checkpoint.size() && entry.checksum == sha256_hex(checkpoint);
}

void ModelRegistry::mark_deployed(const std::string& model_id, std::uint64_t version, NodeId node) {
  auto it = entries_.find(model_id);
  if (it != entries_.end())
    for (auto& e : it->second)
      if (e.version == version) {
        e.deployed_at.insert(node);
        return;
      }
  throw std::out_of_range("no registered model " + model_id + " v" + std::to_string(version));
}

// ---- trace

std::string EventTrace::to_jsonl(const Topology& topo) const {
  std::string out;
  for (const auto& e : events) {
    ordered_json j;
    j["t"] = e.time;
    j["scheduled_at"] = e.scheduled_at;
    j["node"] = topo.node(e.node).name;
    j["event"] = e.event;
    j["corr"] = e.correlation_id;
    if (e.link) {
      const Link& l = topo.links().at(*e.link);
      j["link"] = *e.link;
      j["iface"] = to_string(l.iface);
      j["to"] = topo.node(*e.link_to).name;
    }
    if (e.message) {
      j["msg"] = to_string(*e.message);
      j["bytes"] = e.bytes;
    }
    j["detail"] = e.detail;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::uint64_t bandwidth_report(const Topology& topo, const EventTrace& trace, NodeId a, NodeId b,
                               const BandwidthFilter& filter) {
  const auto li = topo.link_index(a, b);
  if (!li) throw TopologyError("no link between " + topo.node(a).name + " and " + topo.node(b).name);
  std::uint64_t total = 0;
  for (const auto& e : trace.events) {
    if (e.event != "send" || e.link != li) continue;
    if (filter.from && e.node != *filter.from) continue;
    if (filter.kind && e.message != filter.kind) continue;
    total += e.bytes;
  }
  return total;
}

// ---- simulation

namespace {

const std::vector<Interface> kDeployInterfaces{Interface::A1, Interface::SRIC_DIRECT, Interface::AIR};

bool is_codec(ModelKind k) { return k == ModelKind::codec_amplitude || k == ModelKind::codec_phase; }

}  // namespace

Simulation::Simulation(Topology topology, SimConfig config) : topo_(std::move(topology)), config_(config) {
  validate_topology(topo_, true);
  localization_route();
}

void Simulation::schedule(SimTime at, std::function<void()> handler) {
  if (at < now_)
    throw std::logic_error("cannot schedule at t=" + std::to_string(at) + " before now=" + std::to_string(now_));
  queue_.push({at, seq_++, now_, std::move(handler)});
}

std::optional<std::uint64_t> Simulation::active_version(NodeId node, ModelKind kind) const {
  auto it = active_.find({node, kind});
  if (it == active_.end()) return std::nullopt;
  return it->second.version;
}

void Simulation::record(NodeId node, std::string event, std::uint64_t corr, ordered_json detail) {
  TraceEvent e;
  e.time = now_;
  e.scheduled_at = current_scheduled_at_;
  e.node = node;
  e.event = std::move(event);
  e.correlation_id = corr;
  if (!detail.is_null()) e.detail = std::move(detail);
  trace_.events.push_back(std::move(e));
  digest_stale_ = true;
}

NodeId Simulation::decode_node() const {
  return topo_.require(config_.enhanced_odu ? NodeKind::O_DU : NodeKind::CU_SP);
}

// UE -> O_RU -> O_DU -> CU_SP -> S_RIC -> NEAR_RT_RIC; with an enhanced O_DU
// the reconstruction goes O_DU -> S_RIC directly.
std::vector<NodeId> Simulation::localization_route() const {
  using K = NodeKind;
  std::vector<NodeId> r{topo_.require(K::UE_EDGE), topo_.require(K::O_RU), topo_.require(K::O_DU)};
  if (!config_.enhanced_odu) r.push_back(topo_.require(K::CU_SP));
  r.push_back(topo_.require(K::S_RIC));
  r.push_back(topo_.require(K::NEAR_RT_RIC));
  for (std::size_t i = 0; i + 1 < r.size(); ++i) topo_.link(r[i], r[i + 1]);  // throws when a hop is missing
  return r;
}

void Simulation::forward(SimMessage msg) {
  const NodeId from = msg.route.at(msg.route_pos);
  const NodeId to = msg.route.at(msg.route_pos + 1);
  const std::size_t li = *topo_.link_index(from, to);
  const LinkParams& p = topo_.links()[li].params;
  // store-and-forward: serialization at the link rate, then propagation
  const auto bw = static_cast<long double>(p.bandwidth_Bps);
  const auto tx = static_cast<SimTime>(std::llround(static_cast<long double>(msg.payload_bytes) * 1e6L / bw));
  const SimTime arrival = now_ + tx + p.latency_us;

  TraceEvent e;
  e.time = now_;
  e.scheduled_at = current_scheduled_at_;
  e.node = from;
  e.event = "send";
  e.correlation_id = msg.correlation_id;
  e.link = li;
  e.link_to = to;
  e.message = msg.kind;
  e.bytes = msg.payload_bytes;
  e.detail = ordered_json{{"arrival", arrival}};
  trace_.events.push_back(std::move(e));
  digest_stale_ = true;
  bytes_sent_ += msg.payload_bytes;

  schedule(arrival, [this, m = std::move(msg), to, li]() mutable { arrive(std::move(m), to, li); });
}

void Simulation::arrive(SimMessage msg, NodeId at, std::size_t link) {
  msg.route_pos += 1;
  msg.hop_path.push_back(at);
  TraceEvent e;
  e.time = now_;
  e.scheduled_at = current_scheduled_at_;
  e.node = at;
  e.event = "recv";
  e.correlation_id = msg.correlation_id;
  e.link = link;
  e.link_to = at;
  e.message = msg.kind;
  e.bytes = msg.payload_bytes;
  trace_.events.push_back(std::move(e));
  digest_stale_ = true;

  if (msg.kind == MessageKind::SEMANTIC_PAYLOAD) handle_semantic(std::move(msg), at);
  else handle_deploy(std::move(msg), at);
}

std::uint64_t Simulation::inject_localization_request(NodeId ue, const Eigen::Ref<const Vector<float>>& features,
                                                      std::uint64_t sample_index, std::optional<SimTime> at) {
  if (topo_.node(ue).kind != NodeKind::UE_EDGE) throw std::invalid_argument("requests originate at a UE_EDGE node");
  if (features.size() != csi::kFeatureCount)
    throw ShapeError("localization request expects 13500 features, got " + std::to_string(features.size()));
  const std::uint64_t corr = next_correlation_++;
  auto x = std::make_shared<const Vector<float>>(features);
  schedule(at.value_or(now_), [this, ue, x, corr, sample_index] {
    auto amp = active_.find({ue, ModelKind::codec_amplitude});
    auto ph = active_.find({ue, ModelKind::codec_phase});
    if (amp == active_.end() || ph == active_.end()) {
      record(ue, "SEMANTIC_ENCODE_FAILURE", corr, ordered_json{{"reason", "no encoder deployed"}});
      return;
    }
    const codec::CodecPair pair{std::get<codec::HalfCodec>(*amp->second.artifact),
                                std::get<codec::HalfCodec>(*ph->second.artifact)};
    SimMessage msg;
    msg.kind = MessageKind::SEMANTIC_PAYLOAD;
    msg.correlation_id = corr;
    msg.sample_index = sample_index;
    msg.semantic = std::make_shared<const codec::SemanticPayload>(codec::encode_sample(pair, *x));
    msg.payload_bytes = codec::payload_bytes(pair.amplitude) + codec::payload_bytes(pair.phase);
    msg.encoder_amplitude_version = amp->second.version;
    msg.encoder_phase_version = ph->second.version;
    msg.route = localization_route();
    msg.hop_path = {ue};
    msg.route.front() = ue;
    record(ue, "encode", corr,
           ordered_json{{"sample", sample_index},
                        {"amplitude_version", msg.encoder_amplitude_version},
                        {"phase_version", msg.encoder_phase_version},
                        {"bytes", msg.payload_bytes}});
    forward(std::move(msg));
  });
  return corr;
}

void Simulation::decode_at(SimMessage& msg, NodeId at) {
  auto amp = active_.find({at, ModelKind::codec_amplitude});
  auto ph = active_.find({at, ModelKind::codec_phase});
  const std::uint64_t dec_amp = amp == active_.end() ? 0 : amp->second.version;
  const std::uint64_t dec_ph = ph == active_.end() ? 0 : ph->second.version;
  if (dec_amp != msg.encoder_amplitude_version || dec_ph != msg.encoder_phase_version) {
    record(at, "SEMANTIC_DECODE_FAILURE", msg.correlation_id,
           ordered_json{{"encoder_amplitude_version", msg.encoder_amplitude_version},
                        {"encoder_phase_version", msg.encoder_phase_version},
                        {"decoder_amplitude_version", dec_amp},
                        {"decoder_phase_version", dec_ph}});
    return;
  }
  const codec::CodecPair pair{std::get<codec::HalfCodec>(*amp->second.artifact),
                              std::get<codec::HalfCodec>(*ph->second.artifact)};
  msg.reconstruction = std::make_shared<const Vector<float>>(codec::decode_sample(pair, *msg.semantic));
  msg.semantic.reset();
  msg.decoded = true;
  msg.payload_bytes = static_cast<std::uint64_t>(msg.reconstruction->size()) * sizeof(float);
  record(at, "decode", msg.correlation_id,
         ordered_json{{"amplitude_version", dec_amp}, {"phase_version", dec_ph}, {"bytes", msg.payload_bytes}});
}

void Simulation::handle_semantic(SimMessage msg, NodeId at) {
  const NodeKind kind = topo_.node(at).kind;
  if (kind == NodeKind::O_RU && config_.channel.snr_db) {
    msg.semantic = std::make_shared<const codec::SemanticPayload>(
        codec::apply_channel(*msg.semantic, config_.channel, msg.sample_index));
    record(at, "channel", msg.correlation_id, ordered_json{{"snr_db", *config_.channel.snr_db}});
  }
  if (at == decode_node()) {
    decode_at(msg, at);
    if (!msg.decoded) return;
  }
  if (msg.route_pos + 1 < msg.route.size()) {
    forward(std::move(msg));
    return;
  }
  // final hop: the Near-RT RIC localizes
  auto it = active_.find({at, ModelKind::localizer});
  if (!msg.decoded || it == active_.end()) {
    record(at, "LOC_FAILURE", msg.correlation_id,
           ordered_json{{"reason", msg.decoded ? "no localizer deployed" : "payload not decoded"}});
    return;
  }
  const auto& model = std::get<std::shared_ptr<const loc::LocalizerModel>>(*it->second.artifact);
  const loc::Point p = loc::predict(*model, *msg.reconstruction);
  results_[msg.correlation_id] = {msg.correlation_id, msg.sample_index, p, now_, msg.hop_path};
  record(at, "LOC_RESULT", msg.correlation_id,
         ordered_json{{"sample", msg.sample_index},
                      {"x", p.x},
                      {"y", p.y},
                      {"localizer_version", it->second.version},
                      {"hops", msg.hop_path.size()}});
}

std::uint64_t Simulation::deploy_model(NodeId engine, NodeId target, const ModelRegistryEntry& entry,
                                       ModelArtifact artifact, std::optional<SimTime> at) {
  if (topo_.node(engine).kind != NodeKind::SEMANTIC_ENGINE)
    throw std::invalid_argument("deployments originate at the SEMANTIC_ENGINE");
  topo_.node(target);
  const ModelRegistryEntry& reg = registry_.get(entry.model_id, entry.version);
  if (reg.checksum != entry.checksum || reg.kind != entry.kind)
    throw std::invalid_argument("deployment does not match the registry entry for " + entry.model_id);
  if (is_codec(entry.kind) != std::holds_alternative<codec::HalfCodec>(artifact))
    throw std::invalid_argument("artifact type does not match model kind " + std::string(to_string(entry.kind)));
  if (const auto* loc = std::get_if<std::shared_ptr<const loc::LocalizerModel>>(&artifact); loc && !*loc)
    throw std::invalid_argument("null localizer artifact");

  const auto key = std::make_pair(target, entry.kind);
  if (auto h = highest_.find(key); h != highest_.end() && entry.version <= h->second)
    throw VersionError("stale deployment of " + entry.model_id + " v" + std::to_string(entry.version) + " to " +
                       topo_.node(target).name + " (has v" + std::to_string(h->second) + ")");
  auto route = topo_.route(engine, target, kDeployInterfaces);
  if (!route) throw TopologyError("no deployment path to " + topo_.node(target).name);
  highest_[key] = entry.version;

  const std::uint64_t corr = next_correlation_++;
  SimMessage msg;
  msg.kind = MessageKind::MODEL_DEPLOY;
  msg.correlation_id = corr;
  msg.payload_bytes = std::max<std::uint64_t>(entry.size_bytes, 1);
  msg.route = std::move(*route);
  msg.hop_path = {engine};
  msg.model = reg;
  msg.artifact = std::make_shared<const ModelArtifact>(std::move(artifact));

  schedule(at.value_or(now_), [this, engine, m = std::move(msg)]() mutable {
    record(engine, "deploy", m.correlation_id,
           ordered_json{{"model", m.model->model_id},
                        {"version", m.model->version},
                        {"kind", to_string(m.model->kind)},
                        {"target", topo_.node(m.route.back()).name}});
    if (m.route.size() == 1) {
      handle_deploy(std::move(m), engine);
      return;
    }
    forward(std::move(m));
  });
  return corr;
}

void Simulation::handle_deploy(SimMessage msg, NodeId at) {
  if (msg.route_pos + 1 < msg.route.size()) {
    forward(std::move(msg));
    return;
  }
  if (msg.kind == MessageKind::MODEL_ACK) {
    record(at, "ack_received", msg.correlation_id,
           ordered_json{{"model", msg.model->model_id}, {"version", msg.model->version}});
    return;
  }
  const ModelRegistryEntry& e = *msg.model;
  active_[{at, e.kind}] = {e.version, msg.artifact};
  registry_.mark_deployed(e.model_id, e.version, at);
  record(at, "model_active", msg.correlation_id,
         ordered_json{{"model", e.model_id}, {"version", e.version}, {"kind", to_string(e.kind)}});

  SimMessage ack;
  ack.kind = MessageKind::MODEL_ACK;
  ack.correlation_id = msg.correlation_id;
  ack.payload_bytes = config_.ack_bytes;
  ack.route.assign(msg.route.rbegin(), msg.route.rend());
  ack.hop_path = {at};
  ack.model = msg.model;
  if (ack.route.size() == 1) return;
  forward(std::move(ack));
}

const EventTrace& Simulation::run(SimTime until) {
  while (!queue_.empty() && queue_.top().time <= until) {
    Pending p = queue_.top();
    queue_.pop();
    now_ = p.time;
    current_scheduled_at_ = p.scheduled_at;
    p.handler();
  }
  if (until > now_ && until != std::numeric_limits<SimTime>::max()) now_ = until;
  current_scheduled_at_ = now_;
  if (digest_stale_) {
    const std::string text = trace_.to_jsonl(topo_);
    trace_.digest = sha256_hex({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    digest_stale_ = false;
  }
  return trace_;
}

}  // namespace semoran::sim
