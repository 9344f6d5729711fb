#include "oneseed/mosf.hpp"

#include <algorithm>
#include <limits>

#include "oneseed/error.hpp"

namespace oneseed::mosf {

std::vector<int> assignment_map(const SlicePlan& plan) {
    std::vector<int> out(static_cast<std::size_t>(plan.rows) * plan.cols, -1);
    for (int r = 0; r < plan.rows; ++r) {
        for (int c = 0; c < plan.cols; ++c) {
            int best = -1;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (const Slice& s : plan.slices) {
                if (!s.contains(r, c)) continue;
                const double dr = r - s.center_row;
                const double dc = c - s.center_col;
                const double d2 = dr * dr + dc * dc;
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = s.index;
                }
            }
            if (best < 0)
                throw CoverageError("pixel (" + std::to_string(r) + "," + std::to_string(c) + ") lies in no slice");
            out[static_cast<std::size_t>(r) * plan.cols + c] = best;
        }
    }
    return out;
}

FeatureMap fuse(const SlicePlan& plan, const std::vector<FeatureMap>& slice_maps) {
    if (slice_maps.size() != plan.slices.size()) throw DimError("fuse: expected one heat map per slice");
    const std::size_t channels = slice_maps.empty() ? 0 : slice_maps.front().channels();
    for (std::size_t i = 0; i < slice_maps.size(); ++i) {
        const Slice& s = plan.slices[i];
        const FeatureMap& m = slice_maps[i];
        if (m.height() != static_cast<std::size_t>(s.height) || m.width() != static_cast<std::size_t>(s.width))
            throw DimError("fuse: slice " + std::to_string(i) + " map is " + std::to_string(m.height()) + "x" +
                           std::to_string(m.width()) + ", plan says " + std::to_string(s.height) + "x" +
                           std::to_string(s.width));
        if (m.channels() != channels) throw DimError("fuse: slice maps disagree on channel count");
    }

    const auto assign = assignment_map(plan);
    FeatureMap fused(plan.rows, plan.cols, channels);
    for (int r = 0; r < plan.rows; ++r) {
        for (int c = 0; c < plan.cols; ++c) {
            const int idx = assign[static_cast<std::size_t>(r) * plan.cols + c];
            const Slice& s = plan.slices[idx];
            const auto src = slice_maps[idx].pixel(r - s.row, c - s.col);
            std::copy(src.begin(), src.end(), fused.pixel(r, c).begin());
        }
    }
    return fused;
}

}  // namespace oneseed::mosf
