#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oneseed {

/// Label value marking ignored pixels. No class may use it.
inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Number of horizontal location bands an image is split into (band 0 is the top quarter).
inline constexpr int kBandCount = 4;

enum class ClassKind { object, scene };

const char* to_string(ClassKind kind);
ClassKind parse_class_kind(const std::string& text);

/// The single annotated pixel of a class.
struct SeedPixel {
    std::string image;
    int row = 0;
    int col = 0;

    friend bool operator==(const SeedPixel&, const SeedPixel&) = default;
};

struct ClassDef {
    int id = 0;
    std::string name;
    ClassKind kind = ClassKind::object;
    std::string category;
    std::uint8_t band_mask = 0;  // bit b set <=> band b allowed
    std::optional<SeedPixel> seed;

    bool allows_band(int band) const { return (band_mask >> band) & 1u; }

    friend bool operator==(const ClassDef&, const ClassDef&) = default;
};

/// Immutable registry of the class universe. Class order is the order of
/// definition; matrices and tables indexed "by class" use that order.
class ClassCatalog {
public:
    ClassCatalog() = default;
    /// Validates and indexes the classes. Throws ValidationError.
    /// `require_seeds` enforces one seed pixel per class.
    explicit ClassCatalog(std::vector<ClassDef> classes, bool require_seeds = true);

    const std::vector<ClassDef>& classes() const { return classes_; }
    std::size_t size() const { return classes_.size(); }
    std::size_t object_count() const { return object_ids_.size(); }
    std::size_t scene_count() const { return scene_ids_.size(); }

    const std::vector<int>& object_ids() const { return object_ids_; }
    const std::vector<int>& scene_ids() const { return scene_ids_; }
    std::vector<int> ids() const;

    bool contains(int id) const;
    /// Position of `id` in `classes()`. Throws ValidationError for unknown ids.
    std::size_t index_of(int id) const;
    const ClassDef& get(int id) const { return classes_[index_of(id)]; }
    const ClassDef* find_by_name(const std::string& name) const;

    const std::vector<std::string>& categories() const { return categories_; }
    /// Category index (into `categories()`) of a class id.
    std::size_t category_of(int id) const { return category_of_index_[index_of(id)]; }

    /// Copy with `seed` attached to class `id`.
    ClassCatalog with_seed(int id, SeedPixel seed) const;

    friend bool operator==(const ClassCatalog& a, const ClassCatalog& b) { return a.classes_ == b.classes_; }

private:
    std::vector<ClassDef> classes_;
    std::vector<int> object_ids_;
    std::vector<int> scene_ids_;
    std::vector<std::string> categories_;
    std::vector<std::size_t> category_of_index_;
    std::vector<int> index_by_id_;  // 256 entries, -1 for absent
    bool require_seeds_ = true;
};

/// Class ids whose allowed bands contain `band`. Throws RangeError for band outside 0..3.
std::set<int> bands_allowing(const ClassCatalog& catalog, int band);

ClassCatalog parse_catalog(std::istream& in, bool require_seeds = true);
ClassCatalog load_catalog(const std::filesystem::path& path, bool require_seeds = true);
void write_catalog(const ClassCatalog& catalog, std::ostream& out);
void save_catalog(const ClassCatalog& catalog, const std::filesystem::path& path);

/// The 19 driving-scene classes with train-id ordering, the seven default
/// categories and the shipped band table. Seeds are left unset.
ClassCatalog default_catalog();

}  // namespace oneseed
