#include "magniglyph/dataset.hpp"
#include "magniglyph/errors.hpp"
#include "magniglyph/metrics.hpp"
#include "magniglyph/synth.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace magniglyph;
namespace fs = std::filesystem;

namespace {

std::vector<CorpusEntry> synthetic_corpus(std::size_t n, std::uint64_t seed0 = 0) {
    std::vector<CorpusEntry> corpus;
    for (std::size_t i = 0; i < n; ++i) {
        SynthSpec spec;
        spec.seed = seed0 + i;
        spec.image_size = {64, 40};
        spec.char_count_min = 2;
        spec.char_count_max = 3;
        spec.glyph_scale_min = 2;
        spec.glyph_scale_max = 3;
        spec.distractor_count = 1;
        SynthScene s = synth_scene(spec);
        corpus.push_back({std::move(s.image), std::move(s.annotation), std::move(s.plate)});
    }
    return corpus;
}

std::map<std::string, std::string> tree_bytes(const fs::path &root) {
    std::map<std::string, std::string> out;
    for (const auto &e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = testutil::slurp(e.path());
    return out;
}

} // namespace

TEST_CASE("train_split") {
    const auto split = train_split(10, 0.8, 3);
    CHECK(std::count(split.begin(), split.end(), true) == 8);
    CHECK(train_split(10, 0.8, 3) == split);
    const auto all = train_split(7, 1.0, 0);
    CHECK(std::count(all.begin(), all.end(), true) == 7);
    const auto none = train_split(7, 0.0, 0);
    CHECK(std::count(none.begin(), none.end(), true) == 0);
    bool differs = false;
    for (std::uint64_t s = 0; s < 10 && !differs; ++s) differs = train_split(10, 0.5, s) != train_split(10, 0.5, s + 1);
    CHECK(differs);
    CHECK_THROWS_AS(train_split(4, 1.5, 0), ValidationError);
}

TEST_CASE("generate_sample") {
    const auto corpus = synthetic_corpus(6);

    SUBCASE("rate 1.0 reproduces the original") {
        for (const auto &e : corpus) {
            const SamplePack p = generate_sample(e.image, e.annotation, 1.0, {});
            CHECK(p.magnified_scene == p.original);
            CHECK(p.magnified_mask == p.component_mask);
        }
    }

    SUBCASE("packs are internally consistent") {
        for (const auto &e : corpus)
            for (double rate : {1.2, 1.5}) {
                const SamplePack p = generate_sample(e.image, e.annotation, rate, {});
                CHECK_NOTHROW(check_pack(p));
                CHECK(p.rate == rate);
                CHECK(p.placements.size() == e.annotation.characters.size());
                // Glyphs never overlap in these scenes, so magnification cannot lose area.
                CHECK(p.magnified_mask.popcount() >= p.component_mask.popcount());
            }
    }

    SUBCASE("tampering is detected") {
        const auto &e = corpus[0];
        const SamplePack good = generate_sample(e.image, e.annotation, 1.5, {});

        SamplePack p = good;
        const auto &ch = e.annotation.characters[0];
        p.magnified_scene.at(ch.bbox.x0, ch.bbox.y0).r ^= 1;
        CHECK_THROWS_AS(check_pack(p), ValidationError);

        p = good;
        p.component_mask.set(0, 0, !p.component_mask.get(0, 0));
        CHECK_THROWS_AS(check_pack(p), ValidationError);

        p = good;
        p.erased = Raster(p.erased.width(), p.erased.height() + 1);
        CHECK_THROWS_AS(check_pack(p), ValidationError);

        p = good;
        p.erased.at(ch.bbox.x0 - 3 >= 0 ? ch.bbox.x0 - 3 : ch.bbox.x1 + 2, ch.bbox.y0).g ^= 0x80;
        CHECK_THROWS_AS(check_pack(p), ValidationError);
    }

    SUBCASE("only pixel-mask strategies make packs") {
        const auto &e = corpus[0];
        CHECK_THROWS_AS(generate_sample(e.image, e.annotation, 1.2, {1.2, Strategy::DetectionPaste, {}}),
                        ValidationError);
    }

    SUBCASE("erased images stay close to the plate") {
        for (const auto &e : corpus) {
            const SamplePack p = generate_sample(e.image, e.annotation, 1.2, {});
            CHECK(mssim(p.erased, *e.plate) >= 0.95);
        }
    }
}

TEST_CASE("pack files round-trip") {
    const auto corpus = synthetic_corpus(2, 20);
    const auto dir = testutil::temp_dir("pack");
    SamplePack p = generate_sample(corpus[0].image, corpus[0].annotation, 1.5, {});
    p.plate = corpus[0].plate;
    write_pack(dir / "a", p);

    for (const char *f : {"original.png", "erased.png", "component.png", "component_mask.png", "mag_component.png",
                          "mag_mask.png", "magnified.png", "meta.json", "annotation.json", "plate.png"})
        CHECK(fs::exists(dir / "a" / f));

    const SamplePack back = read_pack(dir / "a");
    CHECK(back.image_id == p.image_id);
    CHECK(back.rate == p.rate);
    CHECK(back.strategy == p.strategy);
    CHECK(back.dilation_radius == p.dilation_radius);
    CHECK(back.original == p.original);
    CHECK(back.erased == p.erased);
    CHECK(back.component_image == p.component_image);
    CHECK(back.component_mask == p.component_mask);
    CHECK(back.magnified_component_image == p.magnified_component_image);
    CHECK(back.magnified_mask == p.magnified_mask);
    CHECK(back.magnified_scene == p.magnified_scene);
    CHECK(back.plate == p.plate);
    CHECK(back.annotation.characters == p.annotation.characters);
    REQUIRE(back.placements.size() == p.placements.size());
    for (std::size_t k = 0; k < p.placements.size(); ++k) {
        CHECK(back.placements[k].original == p.placements[k].original);
        CHECK(back.placements[k].target == p.placements[k].target);
        CHECK(back.placements[k].clipped == p.placements[k].clipped);
        CHECK(back.placements[k].visible_pixels == p.placements[k].visible_pixels);
    }
    CHECK_NOTHROW(check_pack(back));

    // A pack without a plate.
    SamplePack q = generate_sample(corpus[1].image, corpus[1].annotation, 1.2, {});
    write_pack(dir / "b", q);
    CHECK_FALSE(fs::exists(dir / "b" / "plate.png"));
    CHECK_FALSE(read_pack(dir / "b").plate.has_value());

    CHECK_THROWS_AS(read_pack(dir / "missing"), IoError);
}

TEST_CASE("pack_id") {
    CHECK(pack_id("img1", 1.2) == "img1_r1.2");
    CHECK(pack_id("img1", 1.5) == "img1_r1.5");
    CHECK(pack_id("a/b", 2.0) == "a_b_r2");
}

TEST_CASE("generate_dataset") {
    const auto corpus = synthetic_corpus(10, 100);

    SUBCASE("10 images x 2 rates at 0.8 split into 16 train and 4 test packs") {
        const auto dir = testutil::temp_dir("dataset_split");
        DatasetOptions opt;
        opt.train_fraction = 0.8;
        const auto manifest = generate_dataset(corpus, opt, dir);
        REQUIRE(manifest.size() == 20);
        CHECK(std::count_if(manifest.begin(), manifest.end(), [](const auto &m) { return m.split == "train"; }) == 16);
        CHECK(std::count_if(manifest.begin(), manifest.end(), [](const auto &m) { return m.split == "test"; }) == 4);

        std::map<std::string, std::string> split_of;
        for (const auto &m : manifest) {
            auto [it, fresh] = split_of.emplace(m.image_id, m.split);
            if (!fresh) CHECK(it->second == m.split);
        }

        CHECK(read_manifest(dir / "manifest.json") == manifest);
        for (const auto &m : manifest) {
            const SamplePack p = read_pack(dir / m.dir);
            CHECK_NOTHROW(check_pack(p));
            CHECK(p.rate == m.rate);
            CHECK(p.image_id == m.image_id);
        }
    }

    SUBCASE("output bytes do not depend on the worker count") {
        const auto a = testutil::temp_dir("dataset_j1");
        const auto b = testutil::temp_dir("dataset_j4");
        DatasetOptions opt;
        opt.seed = 9;
        opt.jobs = 1;
        generate_dataset(std::span(corpus).first(4), opt, a);
        opt.jobs = 4;
        generate_dataset(std::span(corpus).first(4), opt, b);
        const auto ta = tree_bytes(a), tb = tree_bytes(b);
        CHECK(ta.size() > 4 * 2 * 8);
        CHECK(ta == tb);
    }

    SUBCASE("empty corpus and bad rates") {
        const auto dir = testutil::temp_dir("dataset_bad");
        CHECK_THROWS_AS(generate_dataset({}, {}, dir), ValidationError);
        DatasetOptions opt;
        opt.rates = {1.2, -1.0};
        CHECK_THROWS_AS(generate_dataset(corpus, opt, dir), ValidationError);
    }
}
