#pragma once

// Binary checkpoint: 8-byte magic "RRNCKPT1", a little-endian uint64 length,
// that many bytes of UTF-8 JSON metadata, then for each layer in order the
// fan_in x fan_out weights (row-major) and the bias, as little-endian
// float64.

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "rrn/network.hpp"

namespace rrn {

inline constexpr char checkpoint_magic[8] = {'R', 'R', 'N', 'C', 'K', 'P', 'T', '1'};

struct checkpoint {
    network_params params;
    int step = 0;
    /// Free-form metadata; "widths", "activation" and "step" are filled in
    /// on save and read back on load.
    nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const network_params& params, int step,
                     const nlohmann::json& metadata = nlohmann::json::object());

/// Throws corrupt_header_error, truncated_payload_error, or (when
/// `expected` is given and differs) shape_error naming the first
/// mismatched layer.
checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<layer_spec>& expected = std::nullopt);

} // namespace rrn
