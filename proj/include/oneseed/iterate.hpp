#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oneseed/artifacts.hpp"
#include "oneseed/catalog.hpp"
#include "oneseed/infer.hpp"
#include "oneseed/metrics.hpp"

namespace oneseed {

/// Per-region class distribution of a dense prediction. Column j, row c is the
/// share of region j's pixels labelled class_ids[c]; rows follow catalog order.
/// Throws ValidationError when a pixel carries 255 or an unknown label.
SimilarityField aggregate_distribution(const LabelMap& dense, const RegionSet& regions, const ClassCatalog& catalog);

/// Majority label of every region (ties to the smaller label, 255 counts as a label).
std::vector<std::uint8_t> region_majority(const LabelMap& labels, const RegionSet& regions);

struct TrainingExample {
    const ImageArtifacts* image = nullptr;
    const LabelMap* labels = nullptr;
};

/// Segmentation learner driven by the iteration harness. `predict` must be
/// deterministic, safe to call concurrently, and never emit 255.
class Learner {
public:
    virtual ~Learner() = default;
    virtual void train(const std::vector<TrainingExample>& examples, const ClassCatalog& catalog, int round) = 0;
    virtual LabelMap predict(const ImageArtifacts& image) const = 0;
    /// Classes left out of the last training run for lack of examples.
    virtual std::vector<int> dropped_classes() const { return {}; }
};

/// Nearest-centroid learner on the concatenated heat, colour and texture
/// descriptors. A region trains with its majority label, weighted by the mean
/// score of the pixels carrying that label when the map has scores; 255
/// regions are skipped. Similarity to a centroid is the product of the per-part
/// intersections; ties go to the smaller class id.
class NearestCentroidLearner : public Learner {
public:
    void train(const std::vector<TrainingExample>& examples, const ClassCatalog& catalog, int round) override;
    LabelMap predict(const ImageArtifacts& image) const override;
    std::vector<int> dropped_classes() const override { return dropped_; }

    struct Centroid {
        int class_id = 0;
        std::vector<double> heat;
        std::vector<double> color;
        std::vector<double> texture;
    };
    const std::vector<Centroid>& centroids() const { return centroids_; }

    /// Class of the best-matching centroid for one descriptor.
    int classify(const RegionDescriptor& descriptor) const;

private:
    std::vector<Centroid> centroids_;
    std::vector<int> dropped_;
};

/// Out-of-process learner. For round k, `train` writes the labels to
/// `<corpus>/labels_round_k/<id>.pgm` and runs `<command> train <corpus> <k>`
/// followed by `<command> predict <corpus> <k>`; the latter must write
/// `<corpus>/pred_round_k/<id>.pgm` for every image of the corpus, which
/// `predict` then reads back.
class ExternalLearner : public Learner {
public:
    ExternalLearner(std::string command, std::filesystem::path corpus_dir);
    void train(const std::vector<TrainingExample>& examples, const ClassCatalog& catalog, int round) override;
    LabelMap predict(const ImageArtifacts& image) const override;

private:
    void run_step(const char* step, int round) const;

    std::string command_;
    std::filesystem::path corpus_dir_;
    const ClassCatalog* catalog_ = nullptr;
    int round_ = -1;
};

struct IterationOptions {
    int rounds = 3;
    double theta = kIterationTheta;
    bool use_clr = true;        // off: the raw prediction becomes the next label map
    bool use_context = true;
    bool use_location = true;
    Averaging averaging = Averaging::macro;
    int jobs = 1;
};

/// Report of one round. Round 0 describes the initial pseudo labels and the
/// model trained on them; round k >= 1 describes the labels relabelled from
/// round k-1's predictions and the model retrained on them.
struct IterationReport {
    int round = 0;
    std::optional<double> precision;  // pseudo labels vs ground truth on the training split
    double recall = 0.0;
    double ignore_fraction = 0.0;     // share of training pixels labelled 255
    double miou_class = 0.0;          // trained model on the held-out split
    double miou_category = 0.0;
    std::vector<int> dropped_classes;
};

struct IterationResult {
    std::vector<IterationReport> reports;
    std::vector<LabelMap> labels;  // final labels of the training split
};

/// Invoked after each round with the labels the model was trained on and the
/// model's predictions on the training split (empty for round 0).
using RoundObserver = std::function<void(int round, const std::vector<LabelMap>& labels,
                                         const std::vector<LabelMap>& predictions)>;

/// Alternates learner training and CLR relabelling. Learner failures are
/// rethrown as LearnerError naming the round.
IterationResult run_iterations(const std::vector<const ImageArtifacts*>& train,
                               const std::vector<const ImageArtifacts*>& heldout,
                               std::vector<LabelMap> initial_labels, const ClassCatalog& catalog, Learner& learner,
                               const IterationOptions& options, const RoundObserver& observer = {});

void write_iteration_reports(const std::vector<IterationReport>& reports, std::ostream& out);

}  // namespace oneseed
