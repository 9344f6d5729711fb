#include "oneseed/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>

#include "oneseed/corpus.hpp"
#include "oneseed/error.hpp"
#include "oneseed/iterate.hpp"
#include "oneseed/metrics.hpp"
#include "oneseed/parallel.hpp"
#include "oneseed/pipeline.hpp"
#include "oneseed/synth.hpp"

namespace oneseed::cli {

namespace fs = std::filesystem;

std::array<std::uint8_t, 3> palette_color(std::uint8_t label) {
    static constexpr std::uint8_t known[19][3] = {
        {128, 64, 128}, {244, 35, 232}, {70, 70, 70},   {102, 102, 156}, {190, 153, 153},
        {153, 153, 153}, {250, 170, 30}, {220, 220, 0}, {107, 142, 35},  {152, 251, 152},
        {70, 130, 180},  {220, 20, 60},  {255, 0, 0},   {0, 0, 142},     {0, 0, 70},
        {0, 60, 100},    {0, 80, 100},   {0, 0, 230},   {119, 11, 32},
    };
    if (label == kIgnoreLabel) return {0, 0, 0};
    if (label < 19) return {known[label][0], known[label][1], known[label][2]};
    std::array<std::uint8_t, 3> c{};
    for (int bit = 0, v = label; v; ++bit, v >>= 3)
        for (int ch = 0; ch < 3; ++ch) c[ch] |= static_cast<std::uint8_t>(((v >> ch) & 1) << (7 - bit));
    return c;
}

void write_overlay(const FeatureMap& color, const LabelMap& labels, double alpha, const fs::path& path) {
    if (color.channels() != 3) throw DimError("overlay needs a 3-channel colour map");
    if (color.height() != labels.height || color.width() != labels.width)
        throw DimError("overlay: label map and colour map differ in size");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw RangeError("overlay alpha must lie in [0,1]");
    std::string bytes = "P6\n" + std::to_string(labels.width) + " " + std::to_string(labels.height) + "\n255\n";
    for (std::size_t p = 0; p < labels.labels.size(); ++p) {
        const auto pc = palette_color(labels.labels[p]);
        const double a = labels.labels[p] == kIgnoreLabel ? 0.0 : alpha;
        for (int ch = 0; ch < 3; ++ch) {
            const double v = (1.0 - a) * std::clamp(color.data()[p * 3 + ch], 0.0f, 1.0f) * 255.0 + a * pc[ch];
            bytes.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(v))));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IOError("short write to " + path.string());
}

namespace {

struct Global {
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct SynthArgs {
    std::string dir;
    std::string catalog;
    int count = 30;
    int height = 64;
    int width = 128;
    int heat_channels = synth::kDefaultHeatChannels;
    double sigma_h = 0.0, sigma_c = 0.0, sigma_s = 0.0;
    int heldout_every = 5;
};

struct EncodeArgs {
    std::string dir;
    int regions = 96;
    double compactness = 0.1;
};

struct RepresentArgs {
    std::string dir;
    FitOptions fit;
};

struct InferArgs {
    std::string dir;
    std::string mode = "initial";
    std::optional<double> theta;
    bool no_context = false;
    bool no_location = false;
    std::string predictions;
    std::string out = "labels";
};

struct IterateArgs {
    std::string dir;
    int rounds = 3;
    double theta_iter = kIterationTheta;
    std::string learner = "baseline";
    std::string labels = "labels";
    bool no_clr = false;
    bool no_context = false;
    bool no_location = false;
    std::string averaging = "macro";
};

struct EvalArgs {
    std::string dir;
    std::string labels = "labels";
    std::string split = "all";
    std::string averaging = "macro";
    std::string out;
};

struct OverlayArgs {
    std::string dir;
    std::string labels = "labels";
    std::string out = "overlay";
    double alpha = 0.5;
};

struct PlanArgs {
    int height = 0;
    int width = 0;
    std::string out;
};

EncodeOptions encode_options(const EncodeArgs& a) {
    EncodeOptions o;
    o.target_regions = a.regions;
    o.segment.compactness = a.compactness;
    return o;
}

Averaging parse_averaging(const std::string& s) { return s == "micro" ? Averaging::micro : Averaging::macro; }

fs::path under(const fs::path& dir, const std::string& sub) { return fs::path(sub).is_absolute() ? fs::path(sub) : dir / sub; }

ClassCatalog corpus_catalog(const fs::path& dir) { return load_catalog(dir / "catalog.txt"); }

void do_synth(const SynthArgs& a, const Global& g, std::ostream& out) {
    const ClassCatalog base = a.catalog.empty() ? default_catalog() : load_catalog(a.catalog, false);
    synth::CorpusOptions o;
    o.count = a.count;
    o.height = a.height;
    o.width = a.width;
    o.heat_channels = a.heat_channels;
    o.noise = {a.sigma_h, a.sigma_c, a.sigma_s};
    o.seed = g.seed;
    o.heldout_every = a.heldout_every;
    const synth::Corpus corpus = synth::generate_corpus(base, o, g.jobs);
    save_corpus(a.dir, corpus.catalog, corpus.images, corpus.heldout);
    out << "synth: wrote " << corpus.images.size() << " images to " << a.dir << '\n';
}

void do_encode(const EncodeArgs& a, const Global& g, std::ostream& out) {
    const auto entries = read_manifest(a.dir);
    const EncodeOptions o = encode_options(a);
    parallel_for(entries.size(), g.jobs, [&](std::size_t i) { encode_stored(a.dir, entries[i].id, o); });
    out << "encode: " << entries.size() << " images\n";
}

void do_represent(const RepresentArgs& a, const EncodeArgs& enc, std::ostream& out) {
    const fs::path dir = a.dir;
    const ClassCatalog catalog = corpus_catalog(dir);
    const EncodeOptions o = encode_options(enc);
    std::map<std::string, std::unique_ptr<ImageArtifacts>> cache;
    const ImageLookup lookup = [&](const std::string& id) -> const ImageArtifacts* {
        auto it = cache.find(id);
        if (it == cache.end()) {
            if (!fs::exists(image_dir(dir, id))) return nullptr;
            it = cache.emplace(id, std::make_unique<ImageArtifacts>(load_encoded(dir, id, o))).first;
        }
        return it->second.get();
    };
    const Registry registry = fit_all(catalog, lookup, a.fit);
    save_registry(registry, dir / "reps.bin");
    out << "represent: " << registry.objects.size() << " object centers, " << registry.scenes.size()
        << " scene pools from " << cache.size() << " seed images\n";
}

void do_infer(const InferArgs& a, const EncodeArgs& enc, const Global& g, std::ostream& out) {
    const fs::path dir = a.dir;
    const ClassCatalog catalog = corpus_catalog(dir);
    const auto entries = read_manifest(dir);
    InferOptions o;
    o.mode = a.mode == "iteration" ? InferMode::iteration : InferMode::initial;
    o.theta = a.theta.value_or(o.mode == InferMode::iteration ? kIterationTheta : kInitialTheta);
    o.use_context = !a.no_context;
    o.use_location = !a.no_location;
    if (o.mode == InferMode::iteration && a.predictions.empty())
        throw ValidationError("iteration mode needs --predictions <dir> with dense predictions");

    std::optional<Registry> registry;
    if (o.mode == InferMode::initial) registry = load_registry(dir / "reps.bin");
    const fs::path out_dir = under(dir, a.out);
    fs::create_directories(out_dir);
    const EncodeOptions eo = encode_options(enc);
    parallel_for(entries.size(), g.jobs, [&](std::size_t i) {
        const ImageArtifacts image = load_encoded(dir, entries[i].id, eo);
        PseudoLabels labels;
        if (o.mode == InferMode::initial) {
            labels = infer_initial(image, *registry, catalog, o);
        } else {
            const LabelMap dense = read_labelmap(under(dir, a.predictions) / (image.id + ".pgm"), catalog);
            labels = infer_iteration(image, aggregate_distribution(dense, image.regions, catalog), catalog, o);
        }
        write_labelmap(labels.map, out_dir / (image.id + ".pgm"));
    });
    out << "infer: " << entries.size() << " label maps in " << out_dir.string() << '\n';
}

void do_iterate(const IterateArgs& a, const EncodeArgs& enc, const Global& g, std::ostream& out) {
    const fs::path dir = a.dir;
    const ClassCatalog catalog = corpus_catalog(dir);
    const auto entries = read_manifest(dir);
    const auto images = load_all_encoded(dir, entries, encode_options(enc), g.jobs);

    std::vector<const ImageArtifacts*> train, heldout, all;
    std::vector<LabelMap> initial;
    for (std::size_t i = 0; i < images.size(); ++i) {
        all.push_back(&images[i]);
        if (entries[i].heldout) {
            heldout.push_back(&images[i]);
        } else {
            train.push_back(&images[i]);
            initial.push_back(read_labelmap(under(dir, a.labels) / (images[i].id + ".pgm"), catalog));
        }
    }
    if (train.empty()) throw ValidationError("corpus has no training image");

    std::unique_ptr<Learner> learner;
    const bool external = a.learner.rfind("external:", 0) == 0;
    if (external) {
        learner = std::make_unique<ExternalLearner>(a.learner.substr(9), dir);
    } else if (a.learner == "baseline") {
        learner = std::make_unique<NearestCentroidLearner>();
    } else {
        throw ValidationError("unknown learner '" + a.learner + "' (expected baseline or external:<command>)");
    }

    IterationOptions o;
    o.rounds = a.rounds;
    o.theta = a.theta_iter;
    o.use_clr = !a.no_clr;
    o.use_context = !a.no_context;
    o.use_location = !a.no_location;
    o.averaging = parse_averaging(a.averaging);
    o.jobs = g.jobs;

    const auto observer = [&](int round, const std::vector<LabelMap>& labels, const std::vector<LabelMap>&) {
        if (external) return;
        const fs::path labels_dir = dir / ("labels_round_" + std::to_string(round));
        const fs::path pred_dir = dir / ("pred_round_" + std::to_string(round));
        fs::create_directories(labels_dir);
        fs::create_directories(pred_dir);
        for (std::size_t i = 0; i < train.size(); ++i) write_labelmap(labels[i], labels_dir / (train[i]->id + ".pgm"));
        parallel_for(all.size(), g.jobs,
                     [&](std::size_t i) { write_labelmap(learner->predict(*all[i]), pred_dir / (all[i]->id + ".pgm")); });
    };
    const IterationResult result = run_iterations(train, heldout, std::move(initial), catalog, *learner, o, observer);
    std::ofstream file(dir / "iterations.txt");
    if (!file) throw IOError("cannot write " + (dir / "iterations.txt").string());
    write_iteration_reports(result.reports, file);
    write_iteration_reports(result.reports, out);
}

void do_eval(const EvalArgs& a, std::ostream& out) {
    const fs::path dir = a.dir;
    const ClassCatalog catalog = corpus_catalog(dir);
    const auto entries = read_manifest(dir);
    ConfusionMatrix cm(catalog.ids());
    std::size_t used = 0;
    for (const auto& e : entries) {
        if ((a.split == "train" && e.heldout) || (a.split == "heldout" && !e.heldout)) continue;
        const fs::path gt_path = image_dir(dir, e.id) / "gt.pgm";
        if (!fs::exists(gt_path)) continue;
        const LabelMap pred = read_labelmap(under(dir, a.labels) / (e.id + ".pgm"), catalog);
        cm.add(confusion(pred, read_labelmap(gt_path, catalog), catalog));
        ++used;
    }
    if (used == 0) throw EmptyError("no image of split '" + a.split + "' has ground truth");
    const MetricsReport report = evaluate(cm, catalog, parse_averaging(a.averaging));
    const fs::path metrics_path = a.out.empty() ? dir / "metrics.txt" : fs::path(a.out);
    std::ofstream file(metrics_path);
    if (!file) throw IOError("cannot write " + metrics_path.string());
    write_metrics(report, file);
    print_metrics_table(report, out);
}

void do_overlay(const OverlayArgs& a, const Global& g, std::ostream& out) {
    const fs::path dir = a.dir;
    const ClassCatalog catalog = corpus_catalog(dir);
    const auto entries = read_manifest(dir);
    const fs::path out_dir = under(dir, a.out);
    fs::create_directories(out_dir);
    std::vector<char> written(entries.size(), 0);
    parallel_for(entries.size(), g.jobs, [&](std::size_t i) {
        const fs::path label_path = under(dir, a.labels) / (entries[i].id + ".pgm");
        if (!fs::exists(label_path)) return;
        const FeatureMap color = read_fmap(image_dir(dir, entries[i].id) / "color.fmap");
        write_overlay(color, read_labelmap(label_path, catalog), a.alpha, out_dir / (entries[i].id + ".ppm"));
        written[i] = 1;
    });
    out << "overlay: " << std::count(written.begin(), written.end(), 1) << " images in " << out_dir.string() << '\n';
}

void do_plan(const PlanArgs& a, std::ostream& out) {
    const SlicePlan plan = make_slice_plan(a.height, a.width);
    if (a.out.empty()) {
        write_slice_plan(plan, out);
    } else {
        save_slice_plan(plan, a.out);
    }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"One-seed-per-class weakly supervised segmentation pipeline", "oneseed"};
    app.require_subcommand(1, 1);
    app.set_config("--config", "pipeline.cfg", "Config file of key = value lines; [subcommand] sections; flags win");
    app.set_version_flag("--version", "oneseed 1.0");

    Global g;
    app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads over images")->check(CLI::PositiveNumber)->capture_default_str();

    const auto corpus_dir = [](CLI::App* sub, std::string& dir) {
        sub->add_option("dir", dir, "Corpus directory")->required();
    };
    EncodeArgs enc;
    const auto encode_flags = [&enc](CLI::App* sub) {
        sub->add_option("--regions", enc.regions, "Target superpixel count")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--compactness", enc.compactness, "Spatial weight of the superpixel distance")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    };

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
    corpus_dir(synth_cmd, sa.dir);
    synth_cmd->add_option("--catalog", sa.catalog, "Class table to use instead of the default catalog");
    synth_cmd->add_option("--count", sa.count, "Scenes")->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--height", sa.height)->check(CLI::Range(4, 4096))->capture_default_str();
    synth_cmd->add_option("--width", sa.width)->check(CLI::Range(6, 4096))->capture_default_str();
    synth_cmd->add_option("--heat-channels", sa.heat_channels)->check(CLI::PositiveNumber)->capture_default_str();
    synth_cmd->add_option("--sigma-h", sa.sigma_h, "Heat-map confusion")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    synth_cmd->add_option("--sigma-c", sa.sigma_c, "Colour and texture jitter")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    synth_cmd->add_option("--sigma-s", sa.sigma_s, "Saliency noise")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    synth_cmd->add_option("--heldout-every", sa.heldout_every, "Every n-th scene goes to the held-out split")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* encode_cmd = app.add_subcommand("encode", "Fuse slice heat maps and segment every image");
    corpus_dir(encode_cmd, enc.dir);
    encode_flags(encode_cmd);

    RepresentArgs ra;
    auto* represent_cmd = app.add_subcommand("represent", "Fit object centers and scene pools from the seed pixels");
    corpus_dir(represent_cmd, ra.dir);
    represent_cmd->add_option("--top-fraction", ra.fit.top_fraction)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    represent_cmd->add_option("--max-rounds", ra.fit.max_rounds)->check(CLI::NonNegativeNumber)->capture_default_str();
    represent_cmd->add_option("--context-threshold", ra.fit.context_threshold)->capture_default_str();
    represent_cmd->add_option("--grouping-threshold", ra.fit.grouping_threshold)->capture_default_str();
    represent_cmd->add_option("--max-groups", ra.fit.max_groups)->check(CLI::PositiveNumber)->capture_default_str();

    InferArgs ia;
    auto* infer_cmd = app.add_subcommand("infer", "Write pseudo labels for every image");
    corpus_dir(infer_cmd, ia.dir);
    infer_cmd->add_option("--mode", ia.mode)->check(CLI::IsMember({"initial", "iteration"}))->capture_default_str();
    infer_cmd->add_option("--theta", ia.theta, "Abstention threshold (0.05 initial, 0.5 iteration)")
        ->check(CLI::Range(0.0, 1.0));
    infer_cmd->add_flag("--no-context", ia.no_context, "Skip context propagation");
    infer_cmd->add_flag("--no-location", ia.no_location, "Skip the location-band mask");
    infer_cmd->add_option("--predictions", ia.predictions, "Dense predictions to relabel (iteration mode)");
    infer_cmd->add_option("--out", ia.out, "Output directory, relative to the corpus")->capture_default_str();

    IterateArgs ta;
    auto* iterate_cmd = app.add_subcommand("iterate", "Alternate learner training and relabelling");
    corpus_dir(iterate_cmd, ta.dir);
    iterate_cmd->add_option("--rounds", ta.rounds)->check(CLI::NonNegativeNumber)->capture_default_str();
    iterate_cmd->add_option("--theta-iter", ta.theta_iter)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    iterate_cmd->add_option("--learner", ta.learner, "baseline or external:<command>")->capture_default_str();
    iterate_cmd->add_option("--labels", ta.labels, "Initial labels, relative to the corpus")->capture_default_str();
    iterate_cmd->add_flag("--no-clr", ta.no_clr, "Train on raw predictions");
    iterate_cmd->add_flag("--no-context", ta.no_context);
    iterate_cmd->add_flag("--no-location", ta.no_location);
    iterate_cmd->add_option("--averaging", ta.averaging)->check(CLI::IsMember({"macro", "micro"}))->capture_default_str();

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Score label maps against ground truth");
    corpus_dir(eval_cmd, ea.dir);
    eval_cmd->add_option("--labels", ea.labels, "Label directory, relative to the corpus")->capture_default_str();
    eval_cmd->add_option("--split", ea.split)->check(CLI::IsMember({"all", "train", "heldout"}))->capture_default_str();
    eval_cmd->add_option("--averaging", ea.averaging)->check(CLI::IsMember({"macro", "micro"}))->capture_default_str();
    eval_cmd->add_option("--out", ea.out, "METRICS v1 report path (default <dir>/metrics.txt)");

    OverlayArgs oa;
    auto* overlay_cmd = app.add_subcommand("overlay", "Write label maps over the colour images as PPM");
    corpus_dir(overlay_cmd, oa.dir);
    overlay_cmd->add_option("--labels", oa.labels)->capture_default_str();
    overlay_cmd->add_option("--out", oa.out)->capture_default_str();
    overlay_cmd->add_option("--alpha", oa.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();

    PlanArgs pa;
    auto* plan_cmd = app.add_subcommand("plan", "Write the slice plan for an image size");
    plan_cmd->add_option("--height", pa.height)->required();
    plan_cmd->add_option("--width", pa.width)->required();
    plan_cmd->add_option("--out", pa.out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        if (e.get_exit_code() != 0) err << app.help();
        return 2;
    }

    try {
        if (*synth_cmd) do_synth(sa, g, out);
        if (*encode_cmd) do_encode(enc, g, out);
        if (*represent_cmd) do_represent(ra, enc, out);
        if (*infer_cmd) do_infer(ia, enc, g, out);
        if (*iterate_cmd) do_iterate(ta, enc, g, out);
        if (*eval_cmd) do_eval(ea, out);
        if (*overlay_cmd) do_overlay(oa, g, out);
        if (*plan_cmd) do_plan(pa, out);
    } catch (const Error& e) {
        err << "error [" << e.category() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error [internal]: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace oneseed::cli
