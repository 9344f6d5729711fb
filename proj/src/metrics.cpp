#include "oneseed/metrics.hpp"

#include <charconv>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "oneseed/error.hpp"

namespace oneseed {

ConfusionMatrix::ConfusionMatrix(std::vector<int> ids)
    : class_ids(std::move(ids)), counts(class_ids.size() * class_ids.size(), 0), abstained(class_ids.size(), 0) {}

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

void ConfusionMatrix::add(const ConfusionMatrix& other) {
    if (other.class_ids != class_ids) throw DimError("confusion matrices cover different classes");
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    for (std::size_t i = 0; i < abstained.size(); ++i) abstained[i] += other.abstained[i];
    ignored += other.ignored;
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& gt, const ClassCatalog& catalog) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw DimError("prediction is " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                       ", ground truth is " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
    validate_labelmap(pred, catalog);
    validate_labelmap(gt, catalog);
    ConfusionMatrix cm(catalog.ids());
    std::vector<int> slot(256, -1);
    for (std::size_t i = 0; i < cm.size(); ++i) slot[cm.class_ids[i]] = static_cast<int>(i);
    for (std::size_t p = 0; p < gt.labels.size(); ++p) {
        const int g = gt.labels[p];
        const int q = pred.labels[p];
        if (g == kIgnoreLabel || q == kIgnoreLabel) {
            ++cm.ignored;
            if (g != kIgnoreLabel) ++cm.abstained[slot[g]];
            continue;
        }
        ++cm.at(slot[g], slot[q]);
    }
    return cm;
}

ConfusionMatrix confusion(const std::vector<LabelMap>& preds, const std::vector<LabelMap>& gts,
                          const ClassCatalog& catalog) {
    if (preds.size() != gts.size()) throw DimError("prediction and ground-truth lists differ in length");
    ConfusionMatrix cm(catalog.ids());
    for (std::size_t i = 0; i < preds.size(); ++i) cm.add(confusion(preds[i], gts[i], catalog));
    return cm;
}

ConfusionMatrix collapse_categories(const ConfusionMatrix& cm, const ClassCatalog& catalog) {
    const std::size_t n = catalog.categories().size();
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    ConfusionMatrix out(ids);
    out.ignored = cm.ignored;
    for (std::size_t g = 0; g < cm.size(); ++g) {
        const std::size_t cg = catalog.category_of(cm.class_ids[g]);
        out.abstained[cg] += cm.abstained[g];
        for (std::size_t p = 0; p < cm.size(); ++p) out.at(cg, catalog.category_of(cm.class_ids[p])) += cm.at(g, p);
    }
    return out;
}

namespace {

struct Tallies {
    std::vector<std::uint64_t> tp, fp, fn;
};

Tallies tally(const ConfusionMatrix& cm) {
    const std::size_t n = cm.size();
    Tallies t{std::vector<std::uint64_t>(n), std::vector<std::uint64_t>(n), std::vector<std::uint64_t>(n)};
    for (std::size_t g = 0; g < n; ++g) {
        for (std::size_t p = 0; p < n; ++p) {
            const std::uint64_t v = cm.at(g, p);
            if (g == p) {
                t.tp[g] += v;
            } else {
                t.fn[g] += v;
                t.fp[p] += v;
            }
        }
    }
    return t;
}

IouTable iou_table(const ConfusionMatrix& cm, std::vector<std::string> names) {
    const Tallies t = tally(cm);
    IouTable out{std::move(names), std::vector<std::optional<double>>(cm.size()), 0.0};
    double sum = 0.0;
    int present = 0;
    for (std::size_t i = 0; i < cm.size(); ++i) {
        const std::uint64_t denom = t.tp[i] + t.fp[i] + t.fn[i];
        if (denom == 0) continue;
        out.iou[i] = static_cast<double>(t.tp[i]) / static_cast<double>(denom);
        sum += *out.iou[i];
        ++present;
    }
    if (present > 0) out.mean = sum / present;
    return out;
}

}  // namespace

IouTable miou(const ConfusionMatrix& cm, const ClassCatalog& catalog, Grouping grouping) {
    if (grouping == Grouping::categories) return iou_table(collapse_categories(cm, catalog), catalog.categories());
    std::vector<std::string> names;
    for (const int id : cm.class_ids) names.push_back(catalog.get(id).name);
    return iou_table(cm, std::move(names));
}

PrecisionRecall precision_recall(const ConfusionMatrix& cm, Averaging averaging) {
    Tallies t = tally(cm);
    for (std::size_t i = 0; i < cm.size(); ++i) t.fn[i] += cm.abstained[i];

    PrecisionRecall out;
    if (averaging == Averaging::micro) {
        std::uint64_t tp = 0, predicted = 0, actual = 0;
        for (std::size_t i = 0; i < cm.size(); ++i) {
            tp += t.tp[i];
            predicted += t.tp[i] + t.fp[i];
            actual += t.tp[i] + t.fn[i];
        }
        if (predicted > 0) out.precision = static_cast<double>(tp) / static_cast<double>(predicted);
        if (actual > 0) out.recall = static_cast<double>(tp) / static_cast<double>(actual);
        return out;
    }

    double p_sum = 0.0, r_sum = 0.0;
    int p_n = 0, r_n = 0;
    for (std::size_t i = 0; i < cm.size(); ++i) {
        const std::uint64_t actual = t.tp[i] + t.fn[i];
        if (actual == 0) continue;
        r_sum += static_cast<double>(t.tp[i]) / static_cast<double>(actual);
        ++r_n;
        const std::uint64_t predicted = t.tp[i] + t.fp[i];
        if (predicted == 0) continue;
        p_sum += static_cast<double>(t.tp[i]) / static_cast<double>(predicted);
        ++p_n;
    }
    if (p_n > 0) out.precision = p_sum / p_n;
    if (r_n > 0) out.recall = r_sum / r_n;
    return out;
}

PrecisionRecall macro_pr(const LabelMap& pred, const LabelMap& gt, const ClassCatalog& catalog) {
    return precision_recall(confusion(pred, gt, catalog), Averaging::macro);
}

MetricsReport evaluate(const ConfusionMatrix& cm, const ClassCatalog& catalog, Averaging averaging) {
    MetricsReport r;
    r.classes = miou(cm, catalog, Grouping::classes);
    r.categories = miou(cm, catalog, Grouping::categories);
    r.pr = precision_recall(cm, averaging);
    r.averaging = averaging;
    r.evaluated = cm.total();
    r.ignored = cm.ignored;
    return r;
}

std::string format_real(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

namespace {

std::string space_free(std::string s) {
    for (char& c : s)
        if (c == ' ' || c == '\t') c = '_';
    return s;
}

void write_table_lines(const char* key, const IouTable& table, std::ostream& out) {
    for (std::size_t i = 0; i < table.names.size(); ++i)
        out << key << ' ' << space_free(table.names[i]) << ' ' << (table.iou[i] ? format_real(*table.iou[i]) : "-")
            << '\n';
}

}  // namespace

void write_metrics(const MetricsReport& report, std::ostream& out) {
    out << "METRICS v1\n";
    out << "averaging " << (report.averaging == Averaging::macro ? "macro" : "micro") << '\n';
    out << "precision " << (report.pr.precision ? format_real(*report.pr.precision) : "-") << '\n';
    out << "recall " << format_real(report.pr.recall) << '\n';
    out << "miou_class " << format_real(report.classes.mean) << '\n';
    out << "miou_category " << format_real(report.categories.mean) << '\n';
    out << "evaluated_pixels " << report.evaluated << '\n';
    out << "ignored_pixels " << report.ignored << '\n';
    write_table_lines("iou_class", report.classes, out);
    write_table_lines("iou_category", report.categories, out);
}

void print_metrics_table(const MetricsReport& report, std::ostream& out) {
    const auto pct = [](std::optional<double> v) {
        std::ostringstream s;
        if (v)
            s << std::fixed << std::setprecision(1) << 100.0 * *v;
        else
            s << "-";
        return s.str();
    };
    out << std::left << std::setw(16) << "class" << "IoU\n";
    for (std::size_t i = 0; i < report.classes.names.size(); ++i)
        out << std::left << std::setw(16) << report.classes.names[i] << pct(report.classes.iou[i]) << '\n';
    out << '\n' << std::left << std::setw(16) << "category" << "IoU\n";
    for (std::size_t i = 0; i < report.categories.names.size(); ++i)
        out << std::left << std::setw(16) << report.categories.names[i] << pct(report.categories.iou[i]) << '\n';
    out << "\nmIoU class     " << pct(report.classes.mean) << '\n';
    out << "mIoU category  " << pct(report.categories.mean) << '\n';
    out << "precision      " << pct(report.pr.precision) << '\n';
    out << "recall         " << pct(report.pr.recall) << '\n';
}

}  // namespace oneseed
