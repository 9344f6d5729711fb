#include "oneseed/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "oneseed/error.hpp"
#include "oneseed/mosf.hpp"
#include "oneseed/parallel.hpp"

namespace oneseed {

namespace fs = std::filesystem;

namespace {

bool safe_id(const std::string& id) {
    if (id.empty() || id.front() == '.') return false;
    for (const char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

void write_optional(const std::optional<FeatureMap>& map, const fs::path& path) {
    if (map) {
        write_fmap(*map, path);
    } else {
        std::error_code ec;
        fs::remove(path, ec);
    }
}

std::optional<FeatureMap> read_optional(const fs::path& path) {
    if (!fs::exists(path)) return std::nullopt;
    return read_fmap(path);
}

fs::path slice_path(const fs::path& dir, int i) { return dir / ("slice_" + std::to_string(i) + ".fmap"); }

}  // namespace

fs::path manifest_path(const fs::path& dir) { return dir / "corpus.txt"; }

fs::path image_dir(const fs::path& dir, const std::string& id) {
    if (!safe_id(id)) throw ValidationError("image id '" + id + "' is not usable as a directory name");
    return dir / "images" / id;
}

void write_manifest(const std::vector<CorpusEntry>& entries, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream out(manifest_path(dir));
    if (!out) throw IOError("cannot write " + manifest_path(dir).string());
    out << "CORPUS v1\n";
    for (const auto& e : entries) {
        if (!safe_id(e.id)) throw ValidationError("image id '" + e.id + "' is not usable as a directory name");
        out << e.id << ' ' << (e.heldout ? "heldout" : "train") << '\n';
    }
}

std::vector<CorpusEntry> read_manifest(const fs::path& dir) {
    const fs::path path = manifest_path(dir);
    std::ifstream in(path);
    if (!in) throw IOError("cannot open corpus manifest " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "CORPUS v1") throw ParseError(path.string() + ":1: expected 'CORPUS v1'");
    std::vector<CorpusEntry> out;
    std::set<std::string> seen;
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty() || line.front() == '#') continue;
        std::istringstream ss(line);
        std::string id, split, extra;
        if (!(ss >> id >> split) || (ss >> extra) || (split != "train" && split != "heldout"))
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected '<id> train|heldout'");
        if (!safe_id(id)) throw ValidationError("image id '" + id + "' is not usable as a directory name");
        if (!seen.insert(id).second) throw ValidationError("image id '" + id + "' listed twice");
        out.push_back({id, split == "heldout"});
    }
    return out;
}

void save_raw_image(const RawImage& image, const fs::path& dir) {
    const fs::path d = image_dir(dir, image.id);
    fs::create_directories(d);
    write_fmap(image.color, d / "color.fmap");
    write_optional(image.texture, d / "texture.fmap");
    write_optional(image.edge, d / "edge.fmap");
    const auto& sal = image.saliency;
    write_optional(sal ? std::optional(sal->global) : std::nullopt, d / "sal_global.fmap");
    write_optional(sal ? std::optional(sal->local1) : std::nullopt, d / "sal_local1.fmap");
    write_optional(sal ? std::optional(sal->local2) : std::nullopt, d / "sal_local2.fmap");
    save_slice_plan(image.plan, d / "plan.txt");
    if (image.slice_heat.size() != image.plan.slices.size())
        throw DimError("image " + image.id + ": one heat map per slice expected");
    for (std::size_t i = 0; i < image.slice_heat.size(); ++i) write_fmap(image.slice_heat[i], slice_path(d, static_cast<int>(i)));
    if (image.ground_truth) {
        write_labelmap(*image.ground_truth, d / "gt.pgm");
    } else {
        std::error_code ec;
        fs::remove(d / "gt.pgm", ec);
    }
}

RawImage load_raw_image(const fs::path& dir, const std::string& id) {
    const fs::path d = image_dir(dir, id);
    RawImage raw;
    raw.id = id;
    raw.color = read_fmap(d / "color.fmap");
    if (raw.color.channels() != 3) throw DimError("image " + id + ": color.fmap must have 3 channels");
    raw.texture = read_optional(d / "texture.fmap");
    raw.edge = read_optional(d / "edge.fmap");
    auto global = read_optional(d / "sal_global.fmap");
    auto local1 = read_optional(d / "sal_local1.fmap");
    auto local2 = read_optional(d / "sal_local2.fmap");
    if (global && local1 && local2) {
        raw.saliency = SaliencyViews{std::move(*global), std::move(*local1), std::move(*local2)};
    } else if (global || local1 || local2) {
        throw IOError("image " + id + ": saliency views must be stored all three or not at all");
    }
    raw.plan = load_slice_plan(d / "plan.txt");
    if (raw.plan.rows != static_cast<int>(raw.color.height()) || raw.plan.cols != static_cast<int>(raw.color.width()))
        throw DimError("image " + id + ": slice plan dims differ from the colour map");
    for (std::size_t i = 0; i < raw.plan.slices.size(); ++i) raw.slice_heat.push_back(read_fmap(slice_path(d, static_cast<int>(i))));
    if (fs::exists(d / "gt.pgm")) raw.ground_truth = read_labelmap(d / "gt.pgm");
    return raw;
}

void save_corpus(const fs::path& dir, const ClassCatalog& catalog, const std::vector<RawImage>& images,
                 const std::vector<bool>& heldout) {
    if (heldout.size() != images.size()) throw DimError("one split flag per image expected");
    std::vector<CorpusEntry> entries;
    for (std::size_t i = 0; i < images.size(); ++i) entries.push_back({images[i].id, static_cast<bool>(heldout[i])});
    write_manifest(entries, dir);
    save_catalog(catalog, dir / "catalog.txt");
    for (const auto& im : images) save_raw_image(im, dir);
}

void encode_stored(const fs::path& dir, const std::string& id, const EncodeOptions& options) {
    RawImage raw = load_raw_image(dir, id);
    const FeatureMap fused = mosf::fuse(raw.plan, raw.slice_heat);
    const RegionSet regions = segment(raw.color, options.target_regions, options.segment);
    const fs::path d = image_dir(dir, id);
    write_fmap(fused, d / "fused.fmap");
    save_regions(regions, d / "regions.pgm");
}

bool is_encoded(const fs::path& dir, const std::string& id) {
    const fs::path d = image_dir(dir, id);
    return fs::exists(d / "fused.fmap") && fs::exists(d / "regions.pgm");
}

ImageArtifacts load_encoded(const fs::path& dir, const std::string& id, const EncodeOptions& options) {
    if (!is_encoded(dir, id)) throw IOError("image " + id + " has not been encoded; run encode first");
    RawImage raw = load_raw_image(dir, id);
    raw.slice_heat.clear();
    const fs::path d = image_dir(dir, id);
    return encode_fused(raw, read_fmap(d / "fused.fmap"), options, load_regions(d / "regions.pgm"));
}

std::vector<ImageArtifacts> load_all_encoded(const fs::path& dir, const std::vector<CorpusEntry>& entries,
                                             const EncodeOptions& options, int jobs) {
    std::vector<ImageArtifacts> out(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) { out[i] = load_encoded(dir, entries[i].id, options); });
    return out;
}

}  // namespace oneseed
