#include "oneseed/iterate.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include "oneseed/error.hpp"
#include "oneseed/parallel.hpp"

namespace oneseed {

SimilarityField aggregate_distribution(const LabelMap& dense, const RegionSet& regions, const ClassCatalog& catalog) {
    if (dense.height != regions.height || dense.width != regions.width)
        throw DimError("prediction and region raster differ in size");
    SimilarityField out{catalog.ids(), Matrix(catalog.size(), regions.count)};
    std::vector<int> slot(256, -1);
    for (std::size_t i = 0; i < out.class_ids.size(); ++i) slot[out.class_ids[i]] = static_cast<int>(i);
    for (int j = 0; j < regions.count; ++j) {
        const auto& members = regions.members[j];
        if (members.empty()) throw EmptyError("region " + std::to_string(j) + " has no pixels");
        for (const std::size_t p : members) {
            const int s = slot[dense.labels[p]];
            if (s < 0)
                throw ValidationError("dense prediction carries label " + std::to_string(dense.labels[p]) +
                                      ", which is not a catalog class");
            out.scores(s, j) += 1.0;
        }
        const double n = static_cast<double>(members.size());
        for (std::size_t c = 0; c < out.class_ids.size(); ++c) out.scores(c, j) /= n;
    }
    return out;
}

std::vector<std::uint8_t> region_majority(const LabelMap& labels, const RegionSet& regions) {
    if (labels.height != regions.height || labels.width != regions.width)
        throw DimError("label map and region raster differ in size");
    std::vector<std::uint8_t> out(regions.count, kIgnoreLabel);
    std::vector<std::size_t> votes(256);
    for (int j = 0; j < regions.count; ++j) {
        std::fill(votes.begin(), votes.end(), 0);
        for (const std::size_t p : regions.members[j]) ++votes[labels.labels[p]];
        out[j] = static_cast<std::uint8_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    return out;
}

namespace {

// Mean score of the region's pixels carrying its majority label; 1 without scores.
double region_weight(const LabelMap& labels, const RegionSet& regions, int region, std::uint8_t label) {
    if (!labels.scores) return 1.0;
    double sum = 0.0;
    std::size_t n = 0;
    for (const std::size_t p : regions.members[region]) {
        if (labels.labels[p] != label) continue;
        sum += (*labels.scores)[p];
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

void NearestCentroidLearner::train(const std::vector<TrainingExample>& examples, const ClassCatalog& catalog, int) {
    struct Sum {
        std::vector<double> heat, color, texture;
        double weight = 0.0;
        std::size_t n = 0;
    };
    std::vector<Sum> sums(catalog.size());
    const auto accumulate = [](std::vector<double>& acc, const std::vector<double>& v, double weight) {
        if (acc.empty()) acc.assign(v.size(), 0.0);
        if (acc.size() != v.size()) throw DimError("training descriptors differ in length");
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += weight * v[i];
    };
    for (const auto& ex : examples) {
        const RegionSet& regions = ex.image->regions;
        const auto majority = region_majority(*ex.labels, regions);
        for (int j = 0; j < regions.count; ++j) {
            if (majority[j] == kIgnoreLabel) continue;
            const double weight = region_weight(*ex.labels, regions, j, majority[j]);
            if (weight <= 0.0) continue;
            Sum& s = sums[catalog.index_of(majority[j])];
            const RegionDescriptor& d = ex.image->descriptors[j];
            accumulate(s.heat, d.heat, weight);
            accumulate(s.color, d.color, weight);
            accumulate(s.texture, d.texture, weight);
            s.weight += weight;
            ++s.n;
        }
    }
    centroids_.clear();
    dropped_.clear();
    for (std::size_t c = 0; c < catalog.size(); ++c) {
        Sum& s = sums[c];
        const int id = catalog.classes()[c].id;
        if (s.n == 0) {
            dropped_.push_back(id);
            continue;
        }
        for (auto* part : {&s.heat, &s.color, &s.texture})
            for (double& v : *part) v /= s.weight;
        centroids_.push_back({id, std::move(s.heat), std::move(s.color), std::move(s.texture)});
    }
    std::sort(centroids_.begin(), centroids_.end(),
              [](const Centroid& a, const Centroid& b) { return a.class_id < b.class_id; });
    if (centroids_.empty()) throw LearnerError("no class has a labelled training region");
}

int NearestCentroidLearner::classify(const RegionDescriptor& d) const {
    if (centroids_.empty()) throw LearnerError("learner used before training");
    int best_id = centroids_.front().class_id;
    double best = -1.0;
    for (const Centroid& c : centroids_) {
        const double s = sim_hist(c.heat, d.heat) * sim_hist(c.color, d.color) * sim_hist(c.texture, d.texture);
        if (s > best) {
            best = s;
            best_id = c.class_id;
        }
    }
    return best_id;
}

LabelMap NearestCentroidLearner::predict(const ImageArtifacts& image) const {
    std::vector<std::uint8_t> region_label(image.regions.count);
    for (int j = 0; j < image.regions.count; ++j)
        region_label[j] = static_cast<std::uint8_t>(classify(image.descriptors[j]));
    LabelMap out(image.height, image.width);
    for (std::size_t p = 0; p < out.labels.size(); ++p) out.labels[p] = region_label[image.regions.labels[p]];
    return out;
}

ExternalLearner::ExternalLearner(std::string command, std::filesystem::path corpus_dir)
    : command_(std::move(command)), corpus_dir_(std::move(corpus_dir)) {
    if (command_.empty()) throw LearnerError("external learner command is empty");
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (const char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

std::string round_dir(const char* stem, int round) { return std::string(stem) + std::to_string(round); }

}  // namespace

void ExternalLearner::run_step(const char* step, int round) const {
    const std::string cmd =
        command_ + " " + step + " " + shell_quote(corpus_dir_.string()) + " " + std::to_string(round);
    const int status = std::system(cmd.c_str());
    if (status != 0)
        throw LearnerError("external learner '" + cmd + "' exited with status " + std::to_string(status));
}

void ExternalLearner::train(const std::vector<TrainingExample>& examples, const ClassCatalog& catalog, int round) {
    const auto dir = corpus_dir_ / round_dir("labels_round_", round);
    std::filesystem::create_directories(dir);
    for (const auto& ex : examples) write_labelmap(*ex.labels, dir / (ex.image->id + ".pgm"));
    catalog_ = &catalog;
    round_ = round;
    run_step("train", round);
    run_step("predict", round);
}

LabelMap ExternalLearner::predict(const ImageArtifacts& image) const {
    if (round_ < 0) throw LearnerError("learner used before training");
    const auto path = corpus_dir_ / round_dir("pred_round_", round_) / (image.id + ".pgm");
    if (!std::filesystem::exists(path)) throw LearnerError("external learner wrote no prediction " + path.string());
    LabelMap map = read_labelmap(path, *catalog_);
    if (map.height != image.height || map.width != image.width)
        throw LearnerError("prediction " + path.string() + " has the wrong size");
    if (std::find(map.labels.begin(), map.labels.end(), kIgnoreLabel) != map.labels.end())
        throw LearnerError("prediction " + path.string() + " contains 255");
    return map;
}

namespace {

std::vector<LabelMap> predict_all(const Learner& learner, const std::vector<const ImageArtifacts*>& images,
                                  int jobs) {
    std::vector<LabelMap> out(images.size());
    parallel_for(images.size(), jobs, [&](std::size_t i) { out[i] = learner.predict(*images[i]); });
    return out;
}

}  // namespace

IterationResult run_iterations(const std::vector<const ImageArtifacts*>& train,
                               const std::vector<const ImageArtifacts*>& heldout,
                               std::vector<LabelMap> initial_labels, const ClassCatalog& catalog, Learner& learner,
                               const IterationOptions& options, const RoundObserver& observer) {
    if (options.rounds < 0) throw RangeError("rounds must be non-negative");
    if (initial_labels.size() != train.size()) throw DimError("one initial label map per training image expected");
    const auto& eval_split = heldout.empty() ? train : heldout;

    IterationResult result;
    result.labels = std::move(initial_labels);
    std::vector<LabelMap> predictions;

    for (int round = 0; round <= options.rounds; ++round) {
        try {
            if (round > 0) {
                predictions = predict_all(learner, train, options.jobs);
                std::vector<LabelMap> next(train.size());
                parallel_for(train.size(), options.jobs, [&](std::size_t i) {
                    if (!options.use_clr) {
                        next[i] = predictions[i];
                        return;
                    }
                    const InferOptions io{InferMode::iteration, options.theta, options.use_context,
                                          options.use_location};
                    next[i] = infer_iteration(*train[i],
                                              aggregate_distribution(predictions[i], train[i]->regions, catalog),
                                              catalog, io)
                                  .map;
                });
                result.labels = std::move(next);
            }

            std::vector<TrainingExample> examples;
            for (std::size_t i = 0; i < train.size(); ++i) examples.push_back({train[i], &result.labels[i]});
            learner.train(examples, catalog, round);

            IterationReport report;
            report.round = round;
            report.dropped_classes = learner.dropped_classes();

            ConfusionMatrix pseudo(catalog.ids());
            std::size_t ignored = 0, pixels = 0;
            for (std::size_t i = 0; i < train.size(); ++i) {
                const LabelMap& labels = result.labels[i];
                ignored += static_cast<std::size_t>(std::count(labels.labels.begin(), labels.labels.end(), kIgnoreLabel));
                pixels += labels.labels.size();
                if (train[i]->ground_truth) pseudo.add(confusion(labels, *train[i]->ground_truth, catalog));
            }
            const PrecisionRecall pr = precision_recall(pseudo, options.averaging);
            report.precision = pr.precision;
            report.recall = pr.recall;
            report.ignore_fraction = pixels ? static_cast<double>(ignored) / static_cast<double>(pixels) : 0.0;

            const auto eval_preds = predict_all(learner, eval_split, options.jobs);
            ConfusionMatrix model(catalog.ids());
            for (std::size_t i = 0; i < eval_split.size(); ++i)
                if (eval_split[i]->ground_truth) model.add(confusion(eval_preds[i], *eval_split[i]->ground_truth, catalog));
            report.miou_class = miou(model, catalog, Grouping::classes).mean;
            report.miou_category = miou(model, catalog, Grouping::categories).mean;
            result.reports.push_back(std::move(report));
        } catch (const LearnerError& e) {
            throw LearnerError("round " + std::to_string(round) + ": " + e.what());
        } catch (const Error& e) {
            throw LearnerError("round " + std::to_string(round) + ": " + e.category() + ": " + e.what());
        }
        if (observer) observer(round, result.labels, predictions);
    }
    return result;
}

void write_iteration_reports(const std::vector<IterationReport>& reports, std::ostream& out) {
    out << "ITERATIONS v1\n";
    out << "# round precision recall ignore_fraction miou_class miou_category dropped\n";
    for (const auto& r : reports) {
        out << r.round << ' ' << (r.precision ? format_real(*r.precision) : "-") << ' ' << format_real(r.recall)
            << ' ' << format_real(r.ignore_fraction) << ' ' << format_real(r.miou_class) << ' '
            << format_real(r.miou_category) << ' ';
        if (r.dropped_classes.empty()) out << '-';
        for (std::size_t i = 0; i < r.dropped_classes.size(); ++i) out << (i ? "," : "") << r.dropped_classes[i];
        out << '\n';
    }
}

}  // namespace oneseed
