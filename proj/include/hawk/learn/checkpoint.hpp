#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

namespace hawk::learn {

inline constexpr int kCheckpointSchemaVersion = 1;

struct Checkpoint {
    int schemaVersion = kCheckpointSchemaVersion;
    std::string kind;
    nlohmann::json config;
    nlohmann::json parameters;
};

// CBOR-encoded {schemaVersion, kind, config, parameters}.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
// Throws SchemaError on malformed content, a kind mismatch (when `expectedKind`
// is non-empty) or an unsupported schema version.
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expectedKind = "");

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& cp);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& expectedKind = "");

} // namespace hawk::learn
