#ifndef SLOTFILL_MANIFEST_HPP
#define SLOTFILL_MANIFEST_HPP

#include <string>

#include <json.hpp>

#include "slotfill/model.hpp"
#include "slotfill/trainer.hpp"

namespace slotfill {

inline constexpr const char* kToolkitVersion = "0.1.0";

// "fnv1a64:<16 hex digits>" over the raw bytes of the file.
std::string file_digest(const std::string& path);

nlohmann::json config_json(const TrainConfig& cfg);
nlohmann::json parameter_json(Model& model);  // count + per-tensor sizes

// Pretty-printed JSON with a trailing newline; parent directory must exist.
void write_manifest(const std::string& path, const nlohmann::json& manifest);

}  // namespace slotfill

#endif  // SLOTFILL_MANIFEST_HPP
