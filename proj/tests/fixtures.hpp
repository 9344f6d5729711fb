#pragma once

#include <vector>

#include "oneseed/artifacts.hpp"
#include "oneseed/pipeline.hpp"
#include "oneseed/synth.hpp"

namespace testing {

/// `k` regions laid out as vertical stripes of `stripe` columns on a `height`-row image.
inline oneseed::RegionSet stripe_regions(int k, std::size_t height = 4, std::size_t stripe = 1) {
    const std::size_t width = static_cast<std::size_t>(k) * stripe;
    std::vector<int> labels(height * width);
    for (std::size_t p = 0; p < labels.size(); ++p) labels[p] = static_cast<int>((p % width) / stripe);
    return oneseed::build_region_set(height, width, std::move(labels));
}

/// `k` regions laid out as horizontal bands of `band` rows each, `width` columns wide.
inline oneseed::RegionSet band_regions(int k, std::size_t band, std::size_t width = 4) {
    std::vector<int> labels(static_cast<std::size_t>(k) * band * width);
    for (std::size_t p = 0; p < labels.size(); ++p) labels[p] = static_cast<int>(p / width / band);
    return oneseed::build_region_set(static_cast<std::size_t>(k) * band, width, std::move(labels));
}

/// Hand-built artifacts: one descriptor per stripe region and the given context similarity.
inline oneseed::ImageArtifacts toy_image(std::vector<oneseed::RegionDescriptor> descriptors,
                                         oneseed::Matrix context, const char* id = "toy") {
    oneseed::ImageArtifacts im;
    im.id = id;
    im.regions = stripe_regions(static_cast<int>(descriptors.size()));
    im.height = im.regions.height;
    im.width = im.regions.width;
    im.descriptors = std::move(descriptors);
    im.context.similarity = std::move(context);
    return im;
}

struct EncodedCorpus {
    oneseed::synth::Corpus corpus;
    std::vector<oneseed::ImageArtifacts> images;
};

inline EncodedCorpus encoded_corpus(int count, std::uint64_t seed, const oneseed::synth::NoiseLevels& noise,
                                    int jobs = 1) {
    oneseed::synth::CorpusOptions co;
    co.count = count;
    co.seed = seed;
    co.noise = noise;
    EncodedCorpus out{oneseed::synth::generate_corpus(oneseed::default_catalog(), co, jobs), {}};
    out.images = oneseed::encode_all(out.corpus.images, {}, jobs);
    return out;
}

}  // namespace testing
