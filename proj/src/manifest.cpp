#include "slotfill/manifest.hpp"

#include <fstream>
#include <vector>

namespace slotfill {

std::string file_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "cannot open file for digest: " + path);
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                          std::istreambuf_iterator<char>());
  return "fnv1a64:" + hex64(fnv1a64(bytes.data(), bytes.size()));
}

nlohmann::json config_json(const TrainConfig& cfg) {
  return nlohmann::json{{"batch_size", cfg.batch_size},
                        {"lr", cfg.lr},
                        {"epochs", cfg.epochs},
                        {"patience", cfg.patience},
                        {"l2_reg", cfg.l2_reg},
                        {"reg_window", cfg.reg_window},
                        {"dropout", cfg.dropout},
                        {"gru_units", cfg.gru_units},
                        {"embed_dim", cfg.embed_dim},
                        {"window", cfg.window},
                        {"pool_stride", cfg.pool_stride},
                        {"mode", feature_mode_name(cfg.mode)},
                        {"loss", loss_mode_name(cfg.loss)},
                        {"seed", cfg.seed},
                        {"min_improvement", cfg.min_improvement}};
}

nlohmann::json parameter_json(Model& model) {
  nlohmann::json by_tensor = nlohmann::json::object();
  for (const TensorRef& t : model.tensors()) by_tensor[t.name] = t.size();
  return nlohmann::json{{"total", model.parameter_count()},
                        {"by_tensor", by_tensor}};
}

void write_manifest(const std::string& path, const nlohmann::json& manifest) {
  std::ofstream os(path);
  require(bool(os), "cannot write manifest: " + path);
  os << manifest.dump(2) << '\n';
  require(bool(os), "error while writing manifest: " + path);
}

}  // namespace slotfill
