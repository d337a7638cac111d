#include "qclab/nn/checkpoint.hpp"

#include <cstring>

namespace qclab::nn {

namespace {

constexpr char kMagic[4] = {'Q', 'C', 'K', 'P'};

void write_values(BinaryWriter& w, const Vector& v) {
  w.u64(static_cast<std::uint64_t>(v.size()));
  w.f64s({v.data(), static_cast<std::size_t>(v.size())});
}

void read_values(BinaryReader& r, Vector& v) {
  const std::uint64_t n = r.u64();
  if (n != static_cast<std::uint64_t>(v.size()))
    throw CheckpointError(CheckpointError::Kind::Shape, "checkpoint parameter count mismatch");
  r.f64s({v.data(), static_cast<std::size_t>(n)});
}

}  // namespace

void write_layers(BinaryWriter& w, const std::vector<LayerSpec>& layers) {
  w.u32(static_cast<std::uint32_t>(layers.size()));
  for (const auto& l : layers) {
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u32(static_cast<std::uint32_t>(l.in));
    w.u32(static_cast<std::uint32_t>(l.out));
    w.u32(static_cast<std::uint32_t>(l.kernel));
    w.u32(static_cast<std::uint32_t>(l.steps));
    w.u8(static_cast<std::uint8_t>(l.activation));
  }
}

std::vector<LayerSpec> read_layers(BinaryReader& r) {
  const std::uint32_t n = r.u32();
  if (n > 1024) throw CheckpointError(CheckpointError::Kind::Shape, "implausible layer count");
  std::vector<LayerSpec> layers(n);
  for (auto& l : layers) {
    const auto kind = r.u8();
    if (kind > 1) throw CheckpointError(CheckpointError::Kind::Shape, "unknown layer kind");
    l.kind = static_cast<LayerKind>(kind);
    l.in = static_cast<int>(r.u32());
    l.out = static_cast<int>(r.u32());
    l.kernel = static_cast<int>(r.u32());
    l.steps = static_cast<int>(r.u32());
    const auto act = r.u8();
    if (act > 3) throw CheckpointError(CheckpointError::Kind::Shape, "unknown activation");
    l.activation = static_cast<Activation>(act);
  }
  return layers;
}

void Checkpoint::put_network(const std::string& name, const Network& net) {
  BinaryWriter w;
  write_layers(w, net.layers());
  write_values(w, net.params());
  sections_[name] = {SectionType::Network, w.take()};
}

void Checkpoint::put_gru(const std::string& name, const GruCell& gru) {
  BinaryWriter w;
  w.u32(static_cast<std::uint32_t>(gru.input_size()));
  w.u32(static_cast<std::uint32_t>(gru.hidden_size()));
  write_values(w, gru.params());
  sections_[name] = {SectionType::Gru, w.take()};
}

void Checkpoint::put_vector(const std::string& name, const Vector& v) {
  BinaryWriter w;
  write_values(w, v);
  sections_[name] = {SectionType::Vector, w.take()};
}

void Checkpoint::put_blob(const std::string& name, std::string bytes) {
  sections_[name] = {SectionType::Blob, std::move(bytes)};
}

const Checkpoint::Section& Checkpoint::section(const std::string& name, SectionType type) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw CheckpointError(CheckpointError::Kind::Missing, "checkpoint has no section '" + name + "'");
  if (it->second.type != type)
    throw CheckpointError(CheckpointError::Kind::Shape, "checkpoint section '" + name + "' has the wrong type");
  return it->second;
}

Network Checkpoint::get_network(const std::string& name) const {
  try {
    BinaryReader r(section(name, SectionType::Network).payload);
    Network net(read_layers(r));
    read_values(r, net.params());
    return net;
  } catch (const TruncatedInput&) {
    throw CheckpointError(CheckpointError::Kind::Truncated, "truncated network section '" + name + "'");
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointError::Kind::Shape, e.what());
  }
}

GruCell Checkpoint::get_gru(const std::string& name) const {
  try {
    BinaryReader r(section(name, SectionType::Gru).payload);
    const int in = static_cast<int>(r.u32());
    const int hidden = static_cast<int>(r.u32());
    GruCell g(in, hidden);
    read_values(r, g.params());
    return g;
  } catch (const TruncatedInput&) {
    throw CheckpointError(CheckpointError::Kind::Truncated, "truncated GRU section '" + name + "'");
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointError::Kind::Shape, e.what());
  }
}

Vector Checkpoint::get_vector(const std::string& name) const {
  try {
    BinaryReader r(section(name, SectionType::Vector).payload);
    const std::uint64_t n = r.u64();
    if (n * 8 > r.remaining()) throw TruncatedInput();
    Vector v(static_cast<Eigen::Index>(n));
    r.f64s({v.data(), static_cast<std::size_t>(n)});
    return v;
  } catch (const TruncatedInput&) {
    throw CheckpointError(CheckpointError::Kind::Truncated, "truncated vector section '" + name + "'");
  }
}

const std::string& Checkpoint::get_blob(const std::string& name) const { return section(name, SectionType::Blob).payload; }

std::string Checkpoint::serialize() const {
  BinaryWriter w;
  w.raw({kMagic, 4});
  w.u32(kCheckpointVersion);
  w.u64(config_hash);
  w.u32(static_cast<std::uint32_t>(sections_.size()));
  for (const auto& [name, s] : sections_) {
    w.str(name);
    w.u8(static_cast<std::uint8_t>(s.type));
    w.str(s.payload);
  }
  const std::uint64_t sum = fnv1a64(w.bytes());
  w.u64(sum);
  return w.take();
}

Checkpoint Checkpoint::deserialize(std::string_view bytes) {
  using K = CheckpointError::Kind;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw CheckpointError(K::BadMagic, "not a checkpoint file");
  if (bytes.size() < 4 + 4 + 8 + 4 + 8) throw CheckpointError(K::Truncated, "checkpoint file truncated");
  BinaryReader r(bytes);
  r.raw(4);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw CheckpointError(K::Version, "checkpoint version " + std::to_string(version) + ", expected " +
                                          std::to_string(kCheckpointVersion));
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  BinaryReader tail(bytes.substr(bytes.size() - 8));
  if (fnv1a64(body) != tail.u64()) throw CheckpointError(K::Checksum, "checkpoint checksum mismatch (corrupt or truncated)");

  Checkpoint ck;
  try {
    BinaryReader br(body);
    br.raw(8);
    ck.config_hash = br.u64();
    const std::uint32_t n = br.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
      std::string name = br.str();
      const auto type = br.u8();
      if (type < 1 || type > 4) throw CheckpointError(K::Shape, "unknown section type");
      ck.sections_[name] = {static_cast<SectionType>(type), br.str()};
    }
    if (br.remaining() != 0) throw CheckpointError(K::Shape, "trailing bytes in checkpoint");
  } catch (const TruncatedInput&) {
    throw CheckpointError(K::Truncated, "checkpoint file truncated");
  }
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  try {
    write_file_atomic(path, serialize());
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::Io, e.what());
  }
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::Io, e.what());
  }
  return deserialize(bytes);
}

}  // namespace qclab::nn
