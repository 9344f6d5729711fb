#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "oneseed/error.hpp"
#include "oneseed/metrics.hpp"

using namespace oneseed;

namespace {

constexpr std::uint8_t kIgnore = kIgnoreLabel;

LabelMap row_map(std::vector<std::uint8_t> labels) {
    LabelMap m(1, labels.size());
    m.labels = std::move(labels);
    return m;
}

ClassCatalog two_classes() {
    return ClassCatalog({ClassDef{1, "road", ClassKind::scene, "flat", 0xF, std::nullopt},
                         ClassDef{5, "traffic light", ClassKind::object, "object", 0xF, std::nullopt}},
                        false);
}

struct Oracle {
    std::optional<double> precision;
    double recall = 0.0;
    std::optional<double> micro_precision;
    double micro_recall = 0.0;
};

// Per-pixel counting, independent of the confusion matrix.
Oracle count_pr(const std::vector<std::uint8_t>& pred, const std::vector<std::uint8_t>& gt) {
    std::map<int, double> tp, fp, fn;
    for (std::size_t p = 0; p < gt.size(); ++p) {
        if (gt[p] == kIgnore) continue;
        if (pred[p] == kIgnore) {
            fn[gt[p]] += 1;
        } else if (pred[p] == gt[p]) {
            tp[gt[p]] += 1;
        } else {
            fn[gt[p]] += 1;
            fp[pred[p]] += 1;
        }
    }
    Oracle o;
    std::set<int> present;
    for (const std::uint8_t g : gt)
        if (g != kIgnore) present.insert(g);
    double ps = 0, rs = 0, all_tp = 0, all_pred = 0, all_true = 0;
    int pn = 0;
    for (const int c : present) {
        rs += tp[c] / (tp[c] + fn[c]);
        if (tp[c] + fp[c] > 0) {
            ps += tp[c] / (tp[c] + fp[c]);
            ++pn;
        }
    }
    for (const auto& [c, v] : tp) all_tp += v;
    for (const auto& [c, v] : fp) all_pred += v;
    for (const auto& [c, v] : fn) all_true += v;
    all_pred += all_tp;
    all_true += all_tp;
    if (pn) o.precision = ps / pn;
    if (!present.empty()) o.recall = rs / static_cast<double>(present.size());
    if (all_pred > 0) o.micro_precision = all_tp / all_pred;
    if (all_true > 0) o.micro_recall = all_tp / all_true;
    return o;
}

}  // namespace

TEST_CASE("perfect prediction gives a diagonal matrix") {
    const ClassCatalog cat = default_catalog();
    const LabelMap m = row_map({0, 0, 13, 10, 10, kIgnore});
    const ConfusionMatrix cm = confusion(m, m, cat);
    for (std::size_t g = 0; g < cm.size(); ++g)
        for (std::size_t p = 0; p < cm.size(); ++p)
            if (g != p) CHECK(cm.at(g, p) == 0);
    CHECK(cm.at(0, 0) == 2);
    CHECK(cm.at(13, 13) == 1);
    CHECK(cm.total() == 5);
    CHECK(cm.ignored == 1);
    CHECK(miou(cm, cat, Grouping::classes).mean == 1.0);
    const PrecisionRecall pr = precision_recall(cm);
    CHECK(*pr.precision == 1.0);
    CHECK(pr.recall == 1.0);
}

TEST_CASE("all-255 prediction is an empty matrix") {
    const ClassCatalog cat = default_catalog();
    const LabelMap gt = row_map({0, 1, 2, kIgnore});
    const ConfusionMatrix cm = confusion(row_map({kIgnore, kIgnore, kIgnore, kIgnore}), gt, cat);
    CHECK(cm.total() == 0);
    CHECK(cm.ignored == 4);
    CHECK(cm.abstained[0] == 1);
    CHECK(cm.abstained[2] == 1);
    const PrecisionRecall pr = precision_recall(cm);
    CHECK(!pr.precision);
    CHECK(pr.recall == 0.0);
    CHECK(miou(cm, cat, Grouping::classes).mean == 0.0);
}

TEST_CASE("two-class hand count") {
    const ClassCatalog cat = two_classes();
    const ConfusionMatrix cm = confusion(row_map({1, 5, 5}), row_map({1, 1, 5}), cat);
    const IouTable t = miou(cm, cat, Grouping::classes);
    CHECK(t.names == std::vector<std::string>{"road", "traffic light"});
    CHECK(*t.iou[0] == 0.5);
    CHECK(*t.iou[1] == 0.5);
    CHECK(t.mean == 0.5);
    const PrecisionRecall pr = macro_pr(row_map({1, 5, 5}), row_map({1, 1, 5}), cat);
    CHECK(*pr.precision == doctest::Approx(0.75));  // (1 + 1/2) / 2
    CHECK(pr.recall == doctest::Approx(0.75));      // (1/2 + 1) / 2
    const PrecisionRecall micro = precision_recall(cm, Averaging::micro);
    CHECK(*micro.precision == doctest::Approx(2.0 / 3.0));
    CHECK(micro.recall == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("absent classes are excluded from the mean") {
    const ClassCatalog cat = default_catalog();
    const IouTable t = miou(confusion(row_map({0, 0}), row_map({0, 0}), cat), cat, Grouping::classes);
    CHECK(t.mean == 1.0);
    CHECK(t.iou[0]);
    CHECK(std::count_if(t.iou.begin(), t.iou.end(), [](const auto& v) { return v.has_value(); }) == 1);
}

TEST_CASE("intra-category confusion leaves the category score intact") {
    const ClassCatalog cat = default_catalog();
    // car 13, truck 14, bus 15 are all vehicles; road 0 and sky 10 are exact.
    const LabelMap gt = row_map({0, 0, 10, 13, 13, 13, 14, 14, 15});
    const LabelMap pred = row_map({0, 0, 10, 13, 14, 15, 13, 14, 15});
    const ConfusionMatrix cm = confusion(pred, gt, cat);
    const IouTable classes = miou(cm, cat, Grouping::classes);
    const IouTable categories = miou(cm, cat, Grouping::categories);
    CHECK(categories.mean == 1.0);
    CHECK(classes.mean < 1.0);
    CHECK(categories.mean >= classes.mean);
    // car 1/(1+1+2), truck 1/(1+1+1), bus 1/(1+1+0)
    CHECK(*classes.iou[13] == doctest::Approx(0.25));
    CHECK(*classes.iou[14] == doctest::Approx(1.0 / 3.0));
    CHECK(*classes.iou[15] == doctest::Approx(0.5));
    CHECK(categories.names == cat.categories());
    const ConfusionMatrix collapsed = collapse_categories(cm, cat);
    CHECK(collapsed.total() == cm.total());
    CHECK(collapsed.at(6, 6) == 6);
}

TEST_CASE("label noise: precision and recall match a counting oracle") {
    const ClassCatalog cat = default_catalog();
    std::mt19937_64 rng(20);
    std::uniform_int_distribution<int> label(0, 18);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int instance = 0; instance < 10; ++instance) {
        std::vector<LabelMap> preds, gts;
        std::vector<std::uint8_t> all_pred, all_gt;
        for (int image = 0; image < 5; ++image) {
            LabelMap gt(32, 48), pred(32, 48);
            for (std::size_t p = 0; p < gt.labels.size(); ++p) {
                gt.labels[p] = u(rng) < 0.05 ? kIgnore : static_cast<std::uint8_t>(label(rng) % (6 + instance));
                pred.labels[p] = gt.labels[p];
                if (u(rng) < 0.2) pred.labels[p] = u(rng) < 0.25 ? kIgnore : static_cast<std::uint8_t>(label(rng));
            }
            all_pred.insert(all_pred.end(), pred.labels.begin(), pred.labels.end());
            all_gt.insert(all_gt.end(), gt.labels.begin(), gt.labels.end());
            preds.push_back(std::move(pred));
            gts.push_back(std::move(gt));
        }
        const ConfusionMatrix cm = confusion(preds, gts, cat);
        const Oracle o = count_pr(all_pred, all_gt);
        const PrecisionRecall macro = precision_recall(cm, Averaging::macro);
        const PrecisionRecall micro = precision_recall(cm, Averaging::micro);
        CAPTURE(instance);
        CHECK(macro.recall < 1.0);
        CHECK(std::abs(macro.recall - o.recall) < 1e-12);
        CHECK(std::abs(*macro.precision - *o.precision) < 1e-12);
        CHECK(std::abs(micro.recall - o.micro_recall) < 1e-12);
        CHECK(std::abs(*micro.precision - *o.micro_precision) < 1e-12);
        std::uint64_t skipped = 0;
        for (std::size_t p = 0; p < all_gt.size(); ++p) skipped += all_gt[p] == kIgnore || all_pred[p] == kIgnore;
        CHECK(cm.total() + cm.ignored == all_gt.size());
        CHECK(cm.ignored == skipped);
    }
}

TEST_CASE("consistent relabelling leaves the scores unchanged") {
    const ClassCatalog cat = default_catalog();
    std::vector<int> perm(19);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ClassDef> defs = cat.classes();
    for (auto& d : defs) d.id = perm[d.id];
    const ClassCatalog permuted(defs, false);

    std::uniform_int_distribution<int> label(0, 18);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    LabelMap gt(20, 30), pred(20, 30), pgt(20, 30), ppred(20, 30);
    for (std::size_t p = 0; p < gt.labels.size(); ++p) {
        gt.labels[p] = static_cast<std::uint8_t>(label(rng) % 9);
        pred.labels[p] = u(rng) < 0.3 ? static_cast<std::uint8_t>(label(rng)) : gt.labels[p];
        if (u(rng) < 0.05) pred.labels[p] = kIgnore;
        pgt.labels[p] = static_cast<std::uint8_t>(perm[gt.labels[p]]);
        ppred.labels[p] = pred.labels[p] == kIgnore ? kIgnore : static_cast<std::uint8_t>(perm[pred.labels[p]]);
    }
    const MetricsReport a = evaluate(confusion(pred, gt, cat), cat);
    const MetricsReport b = evaluate(confusion(ppred, pgt, permuted), permuted);
    CHECK(std::abs(a.classes.mean - b.classes.mean) < 1e-12);
    CHECK(std::abs(a.categories.mean - b.categories.mean) < 1e-12);
    CHECK(std::abs(*a.pr.precision - *b.pr.precision) < 1e-12);
    CHECK(std::abs(a.pr.recall - b.pr.recall) < 1e-12);
}

TEST_CASE("mIoU is 1 exactly when the matrix is diagonal") {
    const ClassCatalog cat = default_catalog();
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> label(0, 18);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int instance = 0; instance < 50; ++instance) {
        LabelMap gt(8, 8), pred(8, 8);
        const double flip = instance % 2 ? 0.05 : 0.0;
        for (std::size_t p = 0; p < gt.labels.size(); ++p) {
            gt.labels[p] = static_cast<std::uint8_t>(label(rng));
            pred.labels[p] = u(rng) < flip ? static_cast<std::uint8_t>(label(rng)) : gt.labels[p];
        }
        const ConfusionMatrix cm = confusion(pred, gt, cat);
        bool diagonal = true;
        for (std::size_t g = 0; g < cm.size(); ++g)
            for (std::size_t p = 0; p < cm.size(); ++p) diagonal = diagonal && (g == p || cm.at(g, p) == 0);
        const double m = miou(cm, cat, Grouping::classes).mean;
        CHECK(m >= 0.0);
        CHECK(m <= 1.0);
        CHECK((m == 1.0) == diagonal);
    }
}

TEST_CASE("confusion errors") {
    const ClassCatalog cat = two_classes();
    CHECK_THROWS_AS(confusion(row_map({1, 1}), row_map({1}), cat), DimError);
    CHECK_THROWS_AS(confusion(row_map({2}), row_map({1}), cat), ValidationError);
    CHECK_THROWS_AS(confusion(row_map({1}), row_map({3}), cat), ValidationError);
    CHECK_THROWS_AS(confusion({row_map({1})}, {}, cat), DimError);
    ConfusionMatrix cm(cat.ids());
    CHECK_THROWS_AS(cm.add(ConfusionMatrix({1})), DimError);
}

TEST_CASE("metrics report format") {
    const ClassCatalog cat = two_classes();
    const ConfusionMatrix cm = confusion(row_map({1, 5, 5, kIgnore}), row_map({1, 1, 5, 1}), cat);
    std::ostringstream out;
    write_metrics(evaluate(cm, cat), out);
    CHECK(out.str() ==
          "METRICS v1\n"
          "averaging macro\n"
          "precision 0.75\n"
          "recall 0.6666666666666666\n"
          "miou_class 0.5\n"
          "miou_category 0.5\n"
          "evaluated_pixels 3\n"
          "ignored_pixels 1\n"
          "iou_class road 0.5\n"
          "iou_class traffic_light 0.5\n"
          "iou_category flat 0.5\n"
          "iou_category object 0.5\n");

    std::ostringstream none;
    write_metrics(evaluate(ConfusionMatrix(cat.ids()), cat, Averaging::micro), none);
    CHECK(none.str().find("averaging micro\nprecision -\n") != std::string::npos);
    CHECK(none.str().find("iou_class road -\n") != std::string::npos);

    std::ostringstream table;
    print_metrics_table(evaluate(cm, cat), table);
    CHECK(table.str().find("mIoU class     50.0\n") != std::string::npos);
}

TEST_CASE("format_real round-trips") {
    CHECK(format_real(0.5) == "0.5");
    CHECK(format_real(1.0) == "1");
    CHECK(format_real(0.1) == "0.1");
    CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}
