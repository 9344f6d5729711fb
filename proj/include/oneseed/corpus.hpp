#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oneseed/artifacts.hpp"
#include "oneseed/catalog.hpp"

namespace oneseed {

/// On-disk corpus:
///
///     <dir>/corpus.txt                CORPUS v1, then "<id> train|heldout" per image
///     <dir>/catalog.txt               class table with seed pixels
///     <dir>/images/<id>/color.fmap    plus texture, edge, sal_global, sal_local1, sal_local2 (.fmap, optional)
///     <dir>/images/<id>/plan.txt      SLICEPLAN v1
///     <dir>/images/<id>/slice_<i>.fmap
///     <dir>/images/<id>/gt.pgm        optional
///     <dir>/images/<id>/fused.fmap, regions.pgm, regions.txt   written by encode
///     <dir>/reps.bin                  written by represent
///     <dir>/labels/<id>.pgm           written by infer (scores in <id>.scores.fmap)
///     <dir>/labels_round_<k>/, pred_round_<k>/, iterations.txt   written by iterate
struct CorpusEntry {
    std::string id;
    bool heldout = false;

    friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
};

std::filesystem::path manifest_path(const std::filesystem::path& dir);
std::filesystem::path image_dir(const std::filesystem::path& dir, const std::string& id);

void write_manifest(const std::vector<CorpusEntry>& entries, const std::filesystem::path& dir);
/// Throws ParseError on a malformed line, ValidationError on duplicate or unsafe ids.
std::vector<CorpusEntry> read_manifest(const std::filesystem::path& dir);

void save_raw_image(const RawImage& image, const std::filesystem::path& dir);
RawImage load_raw_image(const std::filesystem::path& dir, const std::string& id);

/// Writes manifest, catalog and every image.
void save_corpus(const std::filesystem::path& dir, const ClassCatalog& catalog, const std::vector<RawImage>& images,
                 const std::vector<bool>& heldout);

/// Fuses slice heat and segments one stored image, writing fused.fmap and regions.pgm.
void encode_stored(const std::filesystem::path& dir, const std::string& id, const EncodeOptions& options);
bool is_encoded(const std::filesystem::path& dir, const std::string& id);
/// Rebuilds the encoded state from stored fused heat and regions. Throws IOError
/// when the image was never encoded.
ImageArtifacts load_encoded(const std::filesystem::path& dir, const std::string& id, const EncodeOptions& options);

std::vector<ImageArtifacts> load_all_encoded(const std::filesystem::path& dir, const std::vector<CorpusEntry>& entries,
                                             const EncodeOptions& options, int jobs);

}  // namespace oneseed
