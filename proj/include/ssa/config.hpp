#ifndef SSA_CONFIG_HPP
#define SSA_CONFIG_HPP

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "ssa/explanation.hpp"
#include "ssa/state.hpp"

namespace ssa {

struct Config {
    std::filesystem::path store_dir;
    std::shared_ptr<const Settings> settings = std::make_shared<Settings>();
    TemplateCatalog catalog = default_catalog();
    bool auto_refit = true;

    std::filesystem::path log_path() const { return store_dir / "events.ndjson"; }
    std::filesystem::path snapshot_path() const { return store_dir / "snapshot.json"; }
};

/// Relative paths inside the document resolve against `base_dir`.
Config parse_config(const json& doc, const std::filesystem::path& base_dir);
Config load_config(const std::filesystem::path& path);

// The document `ssa init` writes.
json default_config_json();

}  // namespace ssa

#endif  // SSA_CONFIG_HPP
