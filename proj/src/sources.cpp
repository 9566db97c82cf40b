#include "rrn/sources.hpp"

namespace rrn {

augmented_digit_source::augmented_digit_source(const digit_corpus& corpus, std::uint64_t seed,
                                               int retina_width, property_ranges ranges)
    : corpus_(corpus), gen_(seed), retina_width_(retina_width), ranges_(ranges) {
    if (corpus_.empty()) throw argument_error("augmented_digit_source needs a non-empty corpus");
    ranges_.validate();
}

image augmented_digit_source::next() {
    const std::size_t idx = gen_.index(corpus_.size());
    stimulus_props props = ranges_.sample(gen_);
    props.identity = corpus_.labels[idx];
    return render_stimulus(corpus_.images[idx], props, retina_width_, ranges_).pixels;
}

namespace {
bool depends_on_corpus(novel_kind k) {
    return k == novel_kind::mirrored_digit || k == novel_kind::double_digit;
}
} // namespace

novel_shape_source::novel_shape_source(novel_kind kind, const digit_corpus& corpus, std::uint64_t seed,
                                       int retina_width, property_ranges ranges)
    : kind_(kind), corpus_(corpus), gen_(seed), retina_width_(retina_width), ranges_(ranges) {
    ranges_.validate();
    if (!depends_on_corpus(kind_))
        glyph_ = novel_glyph(kind_, corpus_, 0, corpus_.empty() ? default_glyph_size : corpus_.images.front().width);
}

image novel_shape_source::next() {
    stimulus_props props = ranges_.sample(gen_);
    props.identity = novel_identity(kind_);
    if (depends_on_corpus(kind_)) return generate_novel(kind_, props, corpus_, gen_.next(), retina_width_, ranges_).pixels;
    return render_stimulus(glyph_, props, retina_width_, ranges_).pixels;
}

mixed_source::mixed_source(stimulus_source& a, stimulus_source& b, double p_a, std::uint64_t seed)
    : a_(a), b_(b), p_a_(p_a), gen_(seed) {
    if (!(p_a >= 0.0 && p_a <= 1.0)) throw argument_error("mixing probability must lie in [0,1]");
}

image mixed_source::next() { return gen_.uniform() < p_a_ ? a_.next() : b_.next(); }

} // namespace rrn
