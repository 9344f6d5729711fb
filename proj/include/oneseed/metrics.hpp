#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oneseed/catalog.hpp"
#include "oneseed/featio.hpp"

namespace oneseed {

/// Rows are ground truth, columns predictions, both in catalog class order.
/// Pixels with a 255 on either side are counted in `ignored`; those where only
/// the prediction is 255 are additionally tallied per ground-truth class in
/// `abstained`.
struct ConfusionMatrix {
    std::vector<int> class_ids;
    std::vector<std::uint64_t> counts;  // row-major C x C
    std::vector<std::uint64_t> abstained;
    std::uint64_t ignored = 0;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<int> ids);

    std::size_t size() const { return class_ids.size(); }
    std::uint64_t at(std::size_t gt, std::size_t pred) const { return counts[gt * size() + pred]; }
    std::uint64_t& at(std::size_t gt, std::size_t pred) { return counts[gt * size() + pred]; }
    std::uint64_t total() const;

    /// Adds another matrix over the same classes. Throws DimError otherwise.
    void add(const ConfusionMatrix& other);
};

/// Throws DimError on differing dims and ValidationError on labels outside the catalog.
ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, const ClassCatalog& catalog);

/// Sums confusion matrices of many images.
ConfusionMatrix confusion(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts,
                          const ClassCatalog& catalog);

/// Collapses classes into catalog categories (in `catalog.categories()` order).
ConfusionMatrix collapse_categories(const ConfusionMatrix& cm, const ClassCatalog& catalog);

enum class Grouping { classes, categories };

struct IouTable {
    std::vector<std::string> names;
    std::vector<std::optional<double>> iou;  // empty for entries absent from both maps
    double mean = 0.0;                       // 0 when nothing is present
};

IouTable miou(const ConfusionMatrix& cm, const ClassCatalog& catalog, Grouping grouping);

enum class Averaging { macro, micro };

struct PrecisionRecall {
    std::optional<double> precision;  // empty when no class has predictions
    double recall = 0.0;
};

/// Macro: per-class values averaged over classes present in the ground truth;
/// precision skips classes that received no prediction. Predicted 255 is an
/// abstention: no false positive, one false negative.
PrecisionRecall precision_recall(const ConfusionMatrix& cm, Averaging averaging = Averaging::macro);

PrecisionRecall macro_pr(const LabelMap& pred, const LabelMap& gt, const ClassCatalog& catalog);

struct MetricsReport {
    IouTable classes;
    IouTable categories;
    PrecisionRecall pr;
    Averaging averaging = Averaging::macro;
    std::uint64_t evaluated = 0;
    std::uint64_t ignored = 0;
};

MetricsReport evaluate(const ConfusionMatrix& cm, const ClassCatalog& catalog, Averaging averaging = Averaging::macro);

/// Line-oriented `METRICS v1` report: `key value` lines plus `iou_class` /
/// `iou_category` lines per entry (`-` for excluded entries).
void write_metrics(const MetricsReport& report, std::ostream& out);
/// Human-readable table.
void print_metrics_table(const MetricsReport& report, std::ostream& out);

/// Shortest round-trip decimal form of a double.
std::string format_real(double value);

}  // namespace oneseed
