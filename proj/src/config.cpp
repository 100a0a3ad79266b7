#include "dapac/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nlohmann/json.hpp"

namespace dapac {

using json = nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

Registry load_registry(const std::string& path, const SystemConfig& cfg) {
    json j = json::parse(slurp(path));
    Registry reg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        auto labels = it.value().get<std::vector<std::string>>();
        std::string csv;
        for (size_t i = 0; i < labels.size(); ++i) {
            if (i) csv += ',';
            csv += labels[i];
        }
        reg[it.key()] = cfg.parse_labels(csv);
    }
    return reg;
}

ExperimentConfig load_config(const std::string& path) {
    json j = json::parse(slurp(path));
    ExperimentConfig out;
    out.sys = SystemConfig::from_json(j.dump());
    out.scheme = j.value("scheme", std::string("hetdapac"));
    out.registry_path = j.value("registry", std::string());
    if (!out.registry_path.empty()) {
        std::filesystem::path reg = out.registry_path;
        if (reg.is_relative()) reg = std::filesystem::path(path).parent_path() / reg;
        out.registry = load_registry(reg.string(), out.sys);
    }
    return out;
}

} // namespace dapac
