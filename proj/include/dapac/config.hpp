#pragma once

#include <string>

#include "dapac/model.hpp"

namespace dapac {

/// On-disk experiment description: the system parameters plus the default
/// scheme and the registry of enrolled users. See configs/ for the schema.
struct ExperimentConfig {
    SystemConfig sys;
    std::string scheme;        // dapac | hetdapac | d3 | timeshare
    std::string registry_path; // as written in the config file
    Registry registry;
};

ExperimentConfig load_config(const std::string& path);
Registry load_registry(const std::string& path, const SystemConfig& cfg);

} // namespace dapac
