#pragma once

// Training samplers that render stimuli on the fly.

#include <cstdint>

#include "rrn/network.hpp"
#include "rrn/retina.hpp"

namespace rrn {

/// A random corpus digit with all four properties drawn independently
/// and uniformly from their ranges, freshly for every sample.
class augmented_digit_source final : public stimulus_source {
public:
    augmented_digit_source(const digit_corpus& corpus, std::uint64_t seed, int retina_width = 64,
                           property_ranges ranges = {});
    image next() override;

private:
    const digit_corpus& corpus_;
    rng gen_;
    int retina_width_;
    property_ranges ranges_;
};

/// One novel shape kind under random properties. Kinds built from digits
/// (mirrored, double) resample their digits on every draw.
class novel_shape_source final : public stimulus_source {
public:
    novel_shape_source(novel_kind kind, const digit_corpus& corpus, std::uint64_t seed,
                       int retina_width = 64, property_ranges ranges = {});
    image next() override;

private:
    novel_kind kind_;
    const digit_corpus& corpus_;
    rng gen_;
    int retina_width_;
    property_ranges ranges_;
    image glyph_; // cached for kinds that do not depend on the corpus
};

/// Draws from `a` with probability `p_a`, otherwise from `b`.
class mixed_source final : public stimulus_source {
public:
    mixed_source(stimulus_source& a, stimulus_source& b, double p_a, std::uint64_t seed);
    image next() override;

private:
    stimulus_source& a_;
    stimulus_source& b_;
    double p_a_;
    rng gen_;
};

} // namespace rrn
