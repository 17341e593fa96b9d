#pragma once

#include <memory>
#include <string>
#include <vector>

#include "trapsift/backend.hpp"
#include "trapsift/dnn_backend.hpp"
#include "trapsift/error.hpp"

namespace trapsift {

inline std::vector<std::string> backend_names() { return {"replay", "opencv-dnn"}; }

/// Unloaded backend by name.
inline std::unique_ptr<InferenceBackend> make_backend(const std::string& name) {
    if (name == "replay") return std::make_unique<ReplayBackend>();
    if (name == "opencv-dnn") return std::make_unique<DnnBackend>();
    throw ConfigError("unknown backend '" + name + "' (available: replay, opencv-dnn)");
}

} // namespace trapsift
