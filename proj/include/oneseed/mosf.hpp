#pragma once

#include <vector>

#include "oneseed/featio.hpp"

namespace oneseed::mosf {

/// For every pixel, the index of the containing slice whose center is nearest
/// (Euclidean); ties go to the smaller slice index. Row-major, plan.rows x plan.cols.
std::vector<int> assignment_map(const SlicePlan& plan);

/// Fuses per-slice heat maps (each at its slice's resolution) into one image-sized
/// map by copying every pixel's vector from its assigned slice.
/// Throws DimError on slice count/shape/channel mismatch.
FeatureMap fuse(const SlicePlan& plan, const std::vector<FeatureMap>& slice_maps);

}  // namespace oneseed::mosf
