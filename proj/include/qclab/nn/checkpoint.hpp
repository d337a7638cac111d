#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "qclab/nn/adam.hpp"
#include "qclab/nn/gru.hpp"
#include "qclab/nn/network.hpp"

namespace qclab::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  enum class Kind { Io, Truncated, BadMagic, Version, Checksum, Missing, Shape };
  Kind kind;
  CheckpointError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
};

// Named sections in one file:
//   "QCKP" | u32 version | u64 config hash | u32 section count |
//   per section: name | u8 type | u64 length | payload |
//   u64 FNV-1a of everything before it.
// Numbers are little-endian, parameters are raw IEEE-754 doubles.
class Checkpoint {
 public:
  enum class SectionType : std::uint8_t { Network = 1, Gru = 2, Vector = 3, Blob = 4 };

  std::uint64_t config_hash = 0;

  void put_network(const std::string& name, const Network& net);
  void put_gru(const std::string& name, const GruCell& gru);
  void put_vector(const std::string& name, const Vector& v);
  void put_blob(const std::string& name, std::string bytes);

  bool has(const std::string& name) const { return sections_.count(name) != 0; }
  Network get_network(const std::string& name) const;
  GruCell get_gru(const std::string& name) const;
  Vector get_vector(const std::string& name) const;
  const std::string& get_blob(const std::string& name) const;

  std::string serialize() const;
  static Checkpoint deserialize(std::string_view bytes);

  // Atomic write (temp file + rename).
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  struct Section {
    SectionType type;
    std::string payload;
  };
  const Section& section(const std::string& name, SectionType type) const;
  std::map<std::string, Section> sections_;
};

void write_layers(BinaryWriter& w, const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> read_layers(BinaryReader& r);

}  // namespace qclab::nn
