#pragma once

#include <stdexcept>
#include <string>

namespace rrn {

// Error hierarchy. Each class maps onto one failure category that callers
// (and the CLI exit codes) need to tell apart.

struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct consistency_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct render_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A NaN or infinity showed up in a forward pass or loss.
struct numeric_error : std::runtime_error {
    numeric_error(const std::string& what, int layer_index)
        : std::runtime_error(what), layer(layer_index) {}
    int layer;
};

struct checkpoint_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct corrupt_header_error : checkpoint_error {
    using checkpoint_error::checkpoint_error;
};
struct truncated_payload_error : checkpoint_error {
    using checkpoint_error::checkpoint_error;
};
struct shape_error : checkpoint_error {
    using checkpoint_error::checkpoint_error;
};

struct stratification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct completeness_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct corpus_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Centroid of an image with no intensity.
struct undefined_centroid_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace rrn
