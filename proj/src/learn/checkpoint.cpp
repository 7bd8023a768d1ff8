#include "hawk/learn/checkpoint.hpp"

#include "hawk/error.hpp"

#include <fstream>
#include <iterator>

namespace hawk::learn {

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& cp) {
    const nlohmann::json j = {{"schemaVersion", cp.schemaVersion},
                              {"kind", cp.kind},
                              {"config", cp.config},
                              {"parameters", cp.parameters}};
    return nlohmann::json::to_cbor(j);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& expectedKind) {
    nlohmann::json j;
    try {
        j = nlohmann::json::from_cbor(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint is not valid CBOR: ") + e.what());
    }
    Checkpoint cp;
    try {
        cp.schemaVersion = j.at("schemaVersion").get<int>();
        cp.kind = j.at("kind").get<std::string>();
        cp.config = j.at("config");
        cp.parameters = j.at("parameters");
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("checkpoint: ") + e.what());
    }
    if (cp.schemaVersion != kCheckpointSchemaVersion)
        throw SchemaError("checkpoint schemaVersion " + std::to_string(cp.schemaVersion) + " is not supported");
    if (!expectedKind.empty() && cp.kind != expectedKind)
        throw SchemaError("checkpoint kind '" + cp.kind + "' where '" + expectedKind + "' was expected");
    return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    const auto bytes = encode_checkpoint(cp);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("IoError", "cannot write " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expectedKind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot read " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes, expectedKind);
}

} // namespace hawk::learn
