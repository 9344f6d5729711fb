#include "oneseed/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "oneseed/error.hpp"

namespace oneseed {

namespace {

constexpr const char* kHeader = "CATALOG v1";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

int parse_int(const std::string& text, std::size_t line_no, const char* what) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ParseError("catalog line " + std::to_string(line_no) + ": bad " + what + " '" + text + "'");
    return value;
}

std::string bands_to_string(std::uint8_t mask) {
    std::string out;
    for (int b = 0; b < kBandCount; ++b) {
        if (!((mask >> b) & 1u)) continue;
        if (!out.empty()) out += ',';
        out += std::to_string(b);
    }
    return out;
}

}  // namespace

const char* to_string(ClassKind kind) { return kind == ClassKind::object ? "object" : "scene"; }

ClassKind parse_class_kind(const std::string& text) {
    if (text == "object") return ClassKind::object;
    if (text == "scene") return ClassKind::scene;
    throw ParseError("unknown class kind '" + text + "'");
}

ClassCatalog::ClassCatalog(std::vector<ClassDef> classes, bool require_seeds)
    : classes_(std::move(classes)), index_by_id_(256, -1), require_seeds_(require_seeds) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        const ClassDef& c = classes_[i];
        if (c.id < 0 || c.id > 255) throw ValidationError("class id out of range: " + std::to_string(c.id));
        if (c.id == kIgnoreLabel) throw ValidationError("class '" + c.name + "' uses the ignore id 255");
        if (index_by_id_[c.id] >= 0) throw ValidationError("duplicate class id " + std::to_string(c.id));
        if (c.name.empty()) throw ValidationError("class " + std::to_string(c.id) + " has an empty name");
        if (!names.insert(c.name).second) throw ValidationError("duplicate class name '" + c.name + "'");
        if ((c.band_mask & 0x0Fu) == 0 || (c.band_mask & ~0x0Fu) != 0)
            throw ValidationError("class '" + c.name + "' has no valid allowed bands");
        if (c.category.empty()) throw ValidationError("class '" + c.name + "' has no category");
        if (require_seeds && !c.seed) throw ValidationError("class '" + c.name + "' has no seed pixel");
        if (c.seed && (c.seed->row < 0 || c.seed->col < 0))
            throw ValidationError("class '" + c.name + "' has a negative seed coordinate");
        index_by_id_[c.id] = static_cast<int>(i);

        (c.kind == ClassKind::object ? object_ids_ : scene_ids_).push_back(c.id);
        auto it = std::find(categories_.begin(), categories_.end(), c.category);
        if (it == categories_.end()) {
            category_of_index_.push_back(categories_.size());
            categories_.push_back(c.category);
        } else {
            category_of_index_.push_back(static_cast<std::size_t>(it - categories_.begin()));
        }
    }
    // One seed per class also means no two classes share a seed pixel.
    for (std::size_t i = 0; i < classes_.size(); ++i)
        for (std::size_t j = i + 1; j < classes_.size(); ++j)
            if (classes_[i].seed && classes_[i].seed == classes_[j].seed)
                throw ValidationError("classes '" + classes_[i].name + "' and '" + classes_[j].name +
                                      "' share a seed pixel");
}

std::vector<int> ClassCatalog::ids() const {
    std::vector<int> out;
    out.reserve(classes_.size());
    for (const auto& c : classes_) out.push_back(c.id);
    return out;
}

bool ClassCatalog::contains(int id) const { return id >= 0 && id < 256 && index_by_id_[id] >= 0; }

std::size_t ClassCatalog::index_of(int id) const {
    if (!contains(id)) throw ValidationError("unknown class id " + std::to_string(id));
    return static_cast<std::size_t>(index_by_id_[id]);
}

const ClassDef* ClassCatalog::find_by_name(const std::string& name) const {
    for (const auto& c : classes_)
        if (c.name == name) return &c;
    return nullptr;
}

ClassCatalog ClassCatalog::with_seed(int id, SeedPixel seed) const {
    auto classes = classes_;
    classes[index_of(id)].seed = std::move(seed);
    return ClassCatalog(std::move(classes), require_seeds_);
}

std::set<int> bands_allowing(const ClassCatalog& catalog, int band) {
    if (band < 0 || band >= kBandCount) throw RangeError("band " + std::to_string(band) + " outside 0..3");
    std::set<int> out;
    for (const auto& c : catalog.classes())
        if (c.allows_band(band)) out.insert(c.id);
    return out;
}

ClassCatalog parse_catalog(std::istream& in, bool require_seeds) {
    std::vector<ClassDef> classes;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line == kHeader) {
            if (seen_header) throw ParseError("catalog line " + std::to_string(line_no) + ": repeated header");
            seen_header = true;
            continue;
        }
        if (!seen_header) throw ParseError("catalog line " + std::to_string(line_no) + ": expected 'CATALOG v1'");

        const auto fields = split(line, '\t');
        if (fields.size() != 8)
            throw ParseError("catalog line " + std::to_string(line_no) + ": expected 8 tab-separated fields, got " +
                             std::to_string(fields.size()));
        ClassDef c;
        c.id = parse_int(fields[0], line_no, "id");
        c.name = fields[1];
        try {
            c.kind = parse_class_kind(fields[2]);
        } catch (const ParseError&) {
            throw ParseError("catalog line " + std::to_string(line_no) + ": unknown kind '" + fields[2] + "'");
        }
        c.category = fields[3];
        if (!fields[4].empty()) {
            for (const auto& b : split(fields[4], ',')) {
                const int band = parse_int(b, line_no, "band");
                if (band < 0 || band >= kBandCount)
                    throw ValidationError("catalog line " + std::to_string(line_no) + ": band " + b + " outside 0..3");
                c.band_mask |= static_cast<std::uint8_t>(1u << band);
            }
        }
        if (fields[5] != "-") {
            c.seed = SeedPixel{fields[5], parse_int(fields[6], line_no, "seed row"),
                               parse_int(fields[7], line_no, "seed col")};
        }
        classes.push_back(std::move(c));
    }
    if (!seen_header) throw ParseError("catalog: missing 'CATALOG v1' header");
    return ClassCatalog(std::move(classes), require_seeds);
}

ClassCatalog load_catalog(const std::filesystem::path& path, bool require_seeds) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open catalog " + path.string());
    return parse_catalog(in, require_seeds);
}

void write_catalog(const ClassCatalog& catalog, std::ostream& out) {
    out << kHeader << '\n';
    out << "# id\tname\tkind\tcategory\tbands\tseed_image\tseed_row\tseed_col\n";
    for (const auto& c : catalog.classes()) {
        out << c.id << '\t' << c.name << '\t' << to_string(c.kind) << '\t' << c.category << '\t'
            << bands_to_string(c.band_mask) << '\t';
        if (c.seed)
            out << c.seed->image << '\t' << c.seed->row << '\t' << c.seed->col;
        else
            out << "-\t-\t-";
        out << '\n';
    }
}

void save_catalog(const ClassCatalog& catalog, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write catalog " + path.string());
    write_catalog(catalog, out);
}

ClassCatalog default_catalog() {
    struct Row {
        int id;
        const char* name;
        ClassKind kind;
        const char* category;
        std::uint8_t bands;
    };
    constexpr std::uint8_t all = 0b1111, top = 0b0011, bottom = 0b1100, lower3 = 0b1110;
    static constexpr Row rows[] = {
        {0, "road", ClassKind::scene, "flat", bottom},
        {1, "sidewalk", ClassKind::scene, "flat", bottom},
        {2, "building", ClassKind::scene, "construction", all},
        {3, "wall", ClassKind::scene, "construction", all},
        {4, "fence", ClassKind::object, "construction", all},
        {5, "pole", ClassKind::object, "object", all},
        {6, "traffic light", ClassKind::object, "object", all},
        {7, "traffic sign", ClassKind::object, "object", all},
        {8, "vegetation", ClassKind::scene, "nature", all},
        {9, "terrain", ClassKind::scene, "nature", all},
        {10, "sky", ClassKind::scene, "sky", top},
        {11, "person", ClassKind::object, "human", lower3},
        {12, "rider", ClassKind::object, "human", lower3},
        {13, "car", ClassKind::object, "vehicle", lower3},
        {14, "truck", ClassKind::object, "vehicle", lower3},
        {15, "bus", ClassKind::object, "vehicle", lower3},
        {16, "train", ClassKind::object, "vehicle", lower3},
        {17, "motorcycle", ClassKind::object, "vehicle", lower3},
        {18, "bicycle", ClassKind::object, "vehicle", lower3},
    };
    std::vector<ClassDef> classes;
    for (const auto& r : rows) classes.push_back(ClassDef{r.id, r.name, r.kind, r.category, r.bands, std::nullopt});
    return ClassCatalog(std::move(classes), /*require_seeds=*/false);
}

}  // namespace oneseed
