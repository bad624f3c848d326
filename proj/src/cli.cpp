#include "magniglyph/cli.hpp"

#include "magniglyph/annotations.hpp"
#include "magniglyph/dataset.hpp"
#include "magniglyph/errors.hpp"
#include "magniglyph/magnifier.hpp"
#include "magniglyph/metrics.hpp"
#include "magniglyph/parallel.hpp"
#include "magniglyph/png_io.hpp"
#include "magniglyph/report.hpp"
#include "magniglyph/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace magniglyph::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// A failure tagged with the pipeline stage it came from.
struct StageFailure {
    int code;
    std::string message;
};

template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const IoError& e) {
        throw StageFailure{kIo, name + ": " + e.what()};
    } catch (const fs::filesystem_error& e) {
        throw StageFailure{kIo, name + ": " + e.what()};
    } catch (const std::invalid_argument& e) {
        throw StageFailure{kValidation, name + ": " + e.what()};
    }
}

void require_file(const fs::path& p, const std::string& flag) {
    if (!fs::is_regular_file(p)) {
        throw StageFailure{kIo, "validate arguments: " + flag + " " + p.string() + " does not exist"};
    }
}

void require_dir(const fs::path& p, const std::string& flag) {
    if (!fs::is_directory(p)) {
        throw StageFailure{kIo, "validate arguments: " + flag + " " + p.string() + " is not a directory"};
    }
}

std::vector<double> parse_rates(const std::string& text) {
    std::vector<double> rates;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || !(v > 0.0)) {
            throw ValidationError("invalid rate '" + item + "' (expected positive numbers, comma separated)");
        }
        rates.push_back(v);
    }
    if (rates.empty()) throw ValidationError("no rates given");
    return rates;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void add_inpaint_flags(CLI::App& cmd, InpaintConfig& cfg) {
    cmd.add_option("--max-iterations", cfg.max_iterations, "Inpainting sweep limit")->check(CLI::PositiveNumber);
    cmd.add_option("--tolerance", cfg.tolerance, "Inpainting convergence threshold (max channel change per sweep)")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--dilation", cfg.dilation_radius, "Pixels to grow the text mask before erasing")
        ->check(CLI::NonNegativeNumber);
}

int default_jobs() { return 1; }

// ---------------------------------------------------------------- magnify

struct MagnifyArgs {
    std::string input;
    std::string annotations;
    std::string image_id;
    std::string out;
    std::string intermediates;
    std::string dataset;
    std::string out_dir;
    std::string strategy = "component-center";
    std::optional<double> rate;
    InpaintConfig inpaint;
    int jobs = default_jobs();
};

MagnifyConfig magnify_config(const MagnifyArgs& a, double rate) {
    MagnifyConfig cfg;
    cfg.rate = rate;
    cfg.strategy = parse_strategy(a.strategy);
    cfg.inpaint = a.inpaint;
    cfg.validate();
    return cfg;
}

Raster run_strategy(const Raster& image, const SceneAnnotation& ann, const MagnifyConfig& cfg) {
    if (cfg.strategy == Strategy::DetectionPaste) {
        return detection_paste_baseline(image, ann, cfg.rate);
    }
    return magnify_scene(image, ann, cfg).image;
}

int magnify_single(const MagnifyArgs& a, std::ostream& out) {
    const double rate = a.rate.value_or(1.2);
    const MagnifyConfig cfg = stage("validate arguments", [&] {
        if (a.input.empty() || a.annotations.empty() || a.out.empty()) {
            throw ValidationError("--input, --annotations and --out are required (or use --dataset)");
        }
        return magnify_config(a, rate);
    });
    require_file(a.input, "--input");
    require_file(a.annotations, "--annotations");

    const Raster image = stage("read input", [&] { return read_png(a.input); });
    const SceneAnnotation ann = stage("read annotations", [&] {
        auto scenes = load_annotations(a.annotations);
        if (!a.image_id.empty()) {
            for (auto& s : scenes) {
                if (s.image_id == a.image_id) return s;
            }
            throw ValidationError("no record with image_id '" + a.image_id + "'");
        }
        if (scenes.size() != 1) {
            throw ValidationError("annotation document holds " + std::to_string(scenes.size()) +
                                  " records; choose one with --image-id");
        }
        return scenes.front();
    });

    const MagnifiedScene scene = stage("magnify", [&] {
        MagnifiedScene s = magnify_scene(image, ann, cfg);
        if (cfg.strategy == Strategy::DetectionPaste) {
            s.image = detection_paste_baseline(image, ann, cfg.rate);
        }
        return s;
    });

    stage("write output", [&] {
        write_png(a.out, scene.image);
        if (!a.intermediates.empty()) {
            const fs::path dir = a.intermediates;
            fs::create_directories(dir);
            write_png(dir / "erased.png", scene.erased);
            write_png(dir / "component.png", scene.components.image);
            write_mask_png(dir / "mask.png", scene.components.mask);
            write_mask_png(dir / "magnified_mask.png", scene.magnified_union_mask);
        }
    });
    out << "wrote " << a.out << '\n';
    return kOk;
}

std::vector<std::pair<std::string, fs::path>> list_packs(const fs::path& root) {
    std::vector<std::pair<std::string, fs::path>> packs;
    if (fs::is_regular_file(root / "manifest.json")) {
        for (const auto& m : read_manifest(root / "manifest.json")) packs.emplace_back(m.dir, root / m.dir);
        return packs;
    }
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / "meta.json")) {
            packs.emplace_back(entry.path().filename().string(), entry.path());
        }
    }
    std::sort(packs.begin(), packs.end());
    return packs;
}

int magnify_dataset(const MagnifyArgs& a, std::ostream& out) {
    stage("validate arguments", [&] {
        if (a.out_dir.empty()) throw ValidationError("--dataset requires --out-dir");
        return magnify_config(a, a.rate.value_or(1.0));
    });
    require_dir(a.dataset, "--dataset");
    const auto packs = stage("read dataset", [&] { return list_packs(a.dataset); });
    stage("write output", [&] { fs::create_directories(a.out_dir); });

    stage("magnify", [&] {
        parallel_for(packs.size(), a.jobs, [&](std::size_t i) {
            const auto& [id, dir] = packs[i];
            const json meta = json::parse(std::ifstream(dir / "meta.json"));
            const double rate = a.rate.value_or(meta.at("rate").get<double>());
            auto scenes = load_annotations(dir / "annotation.json");
            const Raster image = read_png(dir / "original.png");
            write_png(fs::path(a.out_dir) / (id + ".png"), run_strategy(image, scenes.at(0), magnify_config(a, rate)));
        });
    });
    out << "wrote " << packs.size() << " images to " << a.out_dir << '\n';
    return kOk;
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
    std::string corpus;
    std::string synthetic;
    std::string rates = "1.2,1.5";
    double split = 0.9;
    std::string out;
    std::uint64_t seed = 0;
    std::string strategy = "component-center";
    InpaintConfig inpaint;
    int jobs = default_jobs();
};

std::vector<CorpusEntry> load_corpus(const fs::path& doc) {
    const auto scenes = load_annotations(doc);
    std::vector<CorpusEntry> corpus;
    for (const auto& s : scenes) {
        Raster image = read_png(doc.parent_path() / s.image_path);
        if (image.size() != s.image_size) {
            throw ValidationError("image '" + s.image_id + "': file size differs from annotated size");
        }
        corpus.push_back({std::move(image), s, std::nullopt});
    }
    return corpus;
}

std::vector<CorpusEntry> synth_corpus(const fs::path& spec_path, int jobs) {
    std::ifstream in(spec_path);
    if (!in) throw IoError("cannot open " + spec_path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(spec_path.string() + ": " + e.what());
    }
    const SynthSpec base = synth_spec_from_json(j);
    const int count = j.value("count", 1);
    if (count < 1) throw ValidationError("synthetic 'count' must be >= 1");

    std::vector<CorpusEntry> corpus(static_cast<std::size_t>(count));
    parallel_for(corpus.size(), jobs, [&](std::size_t i) {
        SynthSpec spec = base;
        spec.seed = base.seed + i;
        SynthScene scene = synth_scene(spec);
        corpus[i] = {std::move(scene.image), std::move(scene.annotation), std::move(scene.plate)};
    });
    return corpus;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    DatasetOptions opts = stage("validate arguments", [&] {
        if (a.corpus.empty() == a.synthetic.empty()) {
            throw ValidationError("give exactly one of --corpus or --synthetic");
        }
        if (!(a.split >= 0.0 && a.split <= 1.0)) throw ValidationError("--split must lie in [0, 1]");
        DatasetOptions o;
        o.rates = parse_rates(a.rates);
        o.train_fraction = a.split;
        o.seed = a.seed;
        o.magnify.strategy = parse_strategy(a.strategy);
        o.magnify.inpaint = a.inpaint;
        o.magnify.validate();
        o.jobs = a.jobs;
        return o;
    });
    if (!a.corpus.empty()) require_file(a.corpus, "--corpus");
    if (!a.synthetic.empty()) require_file(a.synthetic, "--synthetic");

    const auto corpus = stage("load corpus", [&] {
        return a.corpus.empty() ? synth_corpus(a.synthetic, a.jobs) : load_corpus(a.corpus);
    });
    const auto manifest = stage("generate dataset", [&] { return generate_dataset(corpus, opts, a.out); });
    const auto n_train = std::count_if(manifest.begin(), manifest.end(), [](const auto& m) { return m.split == "train"; });
    out << "wrote " << manifest.size() << " packs (" << n_train << " train, " << manifest.size() - n_train
        << " test) to " << a.out << '\n';
    return kOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string pred;
    std::string gt;
    std::string regions = "magnified";
    std::string pooling = "pooled";
    std::string out;
    std::string compare;
    std::string split = "all";
    InpaintConfig inpaint;
    int jobs = default_jobs();
};

struct GtPack {
    std::string id;
    fs::path dir;
    Raster gt;
    std::vector<std::optional<Rect>> regions;
};

std::vector<GtPack> load_gt(const EvaluateArgs& a, RegionSource source) {
    std::vector<std::string> wanted;
    const fs::path root = a.gt;
    std::map<std::string, std::string> split_of;
    if (fs::is_regular_file(root / "manifest.json")) {
        for (const auto& m : read_manifest(root / "manifest.json")) split_of[m.dir] = m.split;
    }
    std::vector<GtPack> packs;
    for (const auto& [id, dir] : list_packs(root)) {
        if (a.split != "all") {
            const auto it = split_of.find(id);
            if (it == split_of.end() || it->second != a.split) continue;
        }
        GtPack p{id, dir, read_png(dir / "magnified.png"), {}};
        json meta;
        try {
            meta = json::parse(std::ifstream(dir / "meta.json"));
            for (const auto& c : meta.at("chars")) {
                if (source == RegionSource::Original) {
                    const auto v = c.at("bbox").get<std::vector<int>>();
                    p.regions.emplace_back(Rect{v.at(0), v.at(1), v.at(2), v.at(3)});
                } else if (c.at("magnified_bbox_clipped").is_null()) {
                    p.regions.emplace_back(std::nullopt);
                } else {
                    const auto v = c.at("magnified_bbox_clipped").get<std::vector<int>>();
                    p.regions.emplace_back(Rect{v.at(0), v.at(1), v.at(2), v.at(3)});
                }
            }
        } catch (const json::exception& e) {
            throw ValidationError((dir / "meta.json").string() + ": " + e.what());
        }
        packs.push_back(std::move(p));
    }
    if (packs.empty()) throw ValidationError("no ground-truth packs found in " + root.string());
    return packs;
}

Raster load_prediction(const fs::path& pred_root, const std::string& id) {
    for (const fs::path& candidate : {pred_root / (id + ".png"), pred_root / id / "magnified.png"}) {
        if (fs::is_regular_file(candidate)) return read_png(candidate);
    }
    throw ValidationError("image '" + id + "': no prediction in " + pred_root.string());
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const auto [source, pooling, strategies] = stage("validate arguments", [&] {
        if (a.pred.empty() && a.compare.empty()) throw ValidationError("give --pred and/or --compare");
        if (a.out.empty()) throw ValidationError("--out is required");
        if (a.split != "all" && a.split != "train" && a.split != "test") {
            throw ValidationError("--split must be all, train or test");
        }
        std::vector<Strategy> strats;
        for (const auto& s : split_list(a.compare)) strats.push_back(parse_strategy(s));
        if (!a.compare.empty() && strats.empty()) throw ValidationError("--compare lists no strategies");
        a.inpaint.validate();
        return std::tuple(a.regions == "original" ? RegionSource::Original : RegionSource::Magnified,
                          a.pooling == "per-image" ? Pooling::PerImage : Pooling::Pooled, strats);
    });
    require_dir(a.gt, "--gt");
    if (!a.pred.empty()) require_dir(a.pred, "--pred");

    const auto gt = stage("read ground truth", [&] { return load_gt(a, source); });

    std::vector<std::pair<std::string, EvalReport>> runs;
    auto score = [&](const std::string& name, auto&& make_pred) {
        std::vector<EvalItem> items(gt.size());
        parallel_for(gt.size(), a.jobs, [&](std::size_t i) {
            items[i] = {gt[i].id, make_pred(gt[i]), gt[i].gt, gt[i].regions};
        });
        runs.emplace_back(name, evaluate(items, {}, a.jobs));
    };

    if (!a.pred.empty()) {
        stage("evaluate", [&] { score("pred", [&](const GtPack& p) { return load_prediction(a.pred, p.id); }); });
    }
    for (Strategy s : strategies) {
        stage("evaluate " + std::string(to_string(s)), [&] {
            score(std::string(to_string(s)), [&](const GtPack& p) {
                const json meta = json::parse(std::ifstream(p.dir / "meta.json"));
                MagnifyConfig cfg;
                cfg.rate = meta.at("rate").get<double>();
                cfg.strategy = s;
                cfg.inpaint = a.inpaint;
                const auto scenes = load_annotations(p.dir / "annotation.json");
                return run_strategy(read_png(p.dir / "original.png"), scenes.at(0), cfg);
            });
        });
    }

    stage("write report", [&] {
        const fs::path json_path = a.out;
        fs::path csv_path = json_path;
        csv_path.replace_extension(".csv");
        if (runs.size() == 1) {
            write_text_file(json_path, to_json(runs.front().second).dump(2) + "\n");
            write_text_file(csv_path, to_csv(runs.front().second));
            return;
        }
        json doc = json::object();
        for (const auto& [name, report] : runs) {
            doc[name] = to_json(report);
            fs::path per_run = json_path;
            per_run.replace_extension("." + name + ".csv");
            write_text_file(per_run, to_csv(report));
        }
        write_text_file(json_path, doc.dump(2) + "\n");
    });

    if (runs.size() == 1) {
        out << format_score(runs.front().second.headline(pooling)) << '\n';
    } else {
        for (const auto& [name, report] : runs) out << name << ": " << format_score(report.headline(pooling)) << '\n';
    }
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scene-text magnification toolkit: erase, extract, magnify and evaluate."};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    MagnifyArgs mag;
    auto* magnify = app.add_subcommand("magnify", "Magnify the characters of one image, or of every pack in a dataset");
    magnify->add_option("--input", mag.input, "Input PNG");
    magnify->add_option("--annotations", mag.annotations, "Annotation JSON document");
    magnify->add_option("--image-id", mag.image_id, "Record to use when the document holds several");
    magnify->add_option("--rate", mag.rate, "Magnification rate (default 1.2; dataset mode defaults to each pack's rate)");
    magnify->add_option("--strategy", mag.strategy, "component-center | rect-lower-right | image-center | detection-paste");
    magnify->add_option("--out", mag.out, "Output PNG");
    magnify->add_option("--emit-intermediates", mag.intermediates,
                        "Directory for erased.png, component.png, mask.png and magnified_mask.png");
    magnify->add_option("--dataset", mag.dataset, "Pack directory to magnify in batch");
    magnify->add_option("--out-dir", mag.out_dir, "Batch output directory (<pack>.png per pack)");
    magnify->add_option("--jobs", mag.jobs, "Worker threads")->envname("MAGNIGLYPH_JOBS")->check(CLI::PositiveNumber);
    add_inpaint_flags(*magnify, mag.inpaint);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write training packs from an annotated or synthetic corpus");
    generate->add_option("--corpus", gen.corpus, "Annotation JSON document; image paths resolve next to it");
    generate->add_option("--synthetic", gen.synthetic, "Synthetic scene spec JSON (with optional 'count')");
    generate->add_option("--rates", gen.rates, "Comma-separated magnification rates");
    generate->add_option("--split", gen.split, "Fraction of images assigned to the training split");
    generate->add_option("--out", gen.out, "Output directory")->required();
    generate->add_option("--seed", gen.seed, "Seed for the train/test split");
    generate->add_option("--strategy", gen.strategy, "component-center | rect-lower-right | image-center");
    generate->add_option("--jobs", gen.jobs, "Worker threads")->envname("MAGNIGLYPH_JOBS")->check(CLI::PositiveNumber);
    add_inpaint_flags(*generate, gen.inpaint);

    EvaluateArgs ev;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Regional SSIM of predictions against generated packs");
    evaluate_cmd->add_option("--pred", ev.pred, "Directory with <pack>.png or <pack>/magnified.png");
    evaluate_cmd->add_option("--gt", ev.gt, "Dataset directory written by 'generate'")->required();
    evaluate_cmd->add_option("--regions", ev.regions, "Character regions to score")
        ->check(CLI::IsMember({"magnified", "original"}));
    evaluate_cmd->add_option("--pooling", ev.pooling, "Headline average")->check(CLI::IsMember({"pooled", "per-image"}));
    evaluate_cmd->add_option("--out", ev.out, "Report JSON path; the CSV is written beside it");
    evaluate_cmd->add_option("--compare", ev.compare,
                             "Comma-separated strategies to run on each pack's original and score in the same run");
    evaluate_cmd->add_option("--split", ev.split, "all | train | test");
    evaluate_cmd->add_option("--jobs", ev.jobs, "Worker threads")->envname("MAGNIGLYPH_JOBS")->check(CLI::PositiveNumber);
    add_inpaint_flags(*evaluate_cmd, ev.inpaint);

    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (magnify->parsed()) {
            return mag.dataset.empty() ? magnify_single(mag, out) : magnify_dataset(mag, out);
        }
        if (generate->parsed()) return cmd_generate(gen, out);
        return cmd_evaluate(ev, out);
    } catch (const StageFailure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }
}

} // namespace magniglyph::cli
