#include "magniglyph/errors.hpp"
#include "magniglyph/imaging.hpp"
#include "magniglyph/magnifier.hpp"
#include "magniglyph/synth.hpp"

#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace magniglyph;
using testutil::solid_char;

namespace {

CharAnnotation random_char(Rng &rng, Size canvas, int max_side, std::uint64_t seed) {
    const int w = rng.uniform_int(2, max_side), h = rng.uniform_int(2, max_side);
    const int x0 = rng.uniform_int(0, canvas.width - w), y0 = rng.uniform_int(0, canvas.height - h);
    Mask m = testutil::random_mask(w, h, 0.6, seed);
    m.set(w / 2, h / 2, true);
    return {std::nullopt, {x0, y0, x0 + w, y0 + h}, m};
}

SceneAnnotation random_scene(std::uint64_t seed, Size size, int max_chars, int max_side) {
    Rng rng(seed);
    std::vector<CharAnnotation> chars;
    const int n = rng.uniform_int(0, max_chars);
    for (int k = 0; k < n; ++k) chars.push_back(random_char(rng, size, max_side, seed * 31 + k));
    return testutil::scene(size, chars, "s" + std::to_string(seed));
}

} // namespace

TEST_CASE("strategy names round-trip") {
    for (Strategy s :
         {Strategy::ComponentCenter, Strategy::RectLowerRight, Strategy::ImageCenter, Strategy::DetectionPaste})
        CHECK(parse_strategy(to_string(s)) == s);
    CHECK_THROWS_AS(parse_strategy("center"), ValidationError);
}

TEST_CASE("scale_component") {
    const Raster img = testutil::random_raster(30, 30, 5);

    SUBCASE("rate 1.0 keeps crop and mask") {
        Rng rng(1);
        const CharAnnotation ch = random_char(rng, {30, 30}, 12, 2);
        const ScaledComponent sc = scale_component(ch, img, 1.0);
        CHECK(sc.mask == ch.mask);
        const Raster c = crop(img, ch.bbox);
        for (int y = 0; y < c.height(); ++y)
            for (int x = 0; x < c.width(); ++x) CHECK(sc.pixels.at(x, y) == (ch.mask.get(x, y) ? c.at(x, y) : kBlack));
    }

    SUBCASE("10x10 at 1.2 is 12x12") {
        const ScaledComponent sc = scale_component(solid_char({3, 3, 13, 13}), img, 1.2);
        CHECK(sc.size() == Size{12, 12});
        CHECK(sc.mask.size() == Size{12, 12});
    }

    SUBCASE("solid 10x10 at 1.5 has popcount 225") {
        CHECK(scale_component(solid_char({3, 3, 13, 13}), img, 1.5).mask.popcount() == 225);
    }

    SUBCASE("tiny rates clamp to one pixel") {
        CHECK(scale_component(solid_char({0, 0, 2, 3}), img, 0.01).size() == Size{1, 1});
    }

    SUBCASE("bad rate") {
        CHECK_THROWS_AS(scale_component(solid_char({0, 0, 2, 3}), img, 0.0), ValidationError);
        CHECK_THROWS_AS(scale_component(solid_char({0, 0, 2, 3}), img, -1.0), ValidationError);
    }

    SUBCASE("area law for masks of at least 100 pixels") {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            Rng rng(seed);
            const int w = rng.uniform_int(10, 28), h = rng.uniform_int(10, 28);
            const Mask m = testutil::random_mask(w, h, 0.5 + 0.5 * rng.uniform01(), seed);
            if (m.popcount() < 100) continue;
            for (double rate : {1.2, 1.5}) {
                const double scaled =
                    static_cast<double>(scale_nearest(m, scaled_length(w, rate), scaled_length(h, rate)).popcount());
                const double expected = rate * rate * static_cast<double>(m.popcount());
                CHECK(scaled >= 0.9 * expected);
                CHECK(scaled <= 1.1 * expected);
            }
        }
    }
}

TEST_CASE("placement") {
    SUBCASE("same size is the original box") {
        CHECK(place_component_center({4, 7, 11, 19}, {7, 12}) == Rect{4, 7, 11, 19});
    }
    SUBCASE("(10,10,20,20) at 1.2") {
        CHECK(place_component_center({10, 10, 20, 20}, {12, 12}) == Rect{9, 9, 21, 21});
    }
    SUBCASE("(0,0,10,10) at 1.5 extends off-image") {
        CHECK(place_component_center({0, 0, 10, 10}, {15, 15}) == Rect{-3, -3, 12, 12});
    }
    SUBCASE("centers stay within half a pixel") {
        Rng rng(3);
        for (int i = 0; i < 500; ++i) {
            const int x0 = rng.uniform_int(-20, 50), y0 = rng.uniform_int(-20, 50);
            const Rect box{x0, y0, x0 + rng.uniform_int(1, 30), y0 + rng.uniform_int(1, 30)};
            const Size s{rng.uniform_int(1, 40), rng.uniform_int(1, 40)};
            const Rect t = place_component_center(box, s);
            CHECK(t.size() == s);
            CHECK(std::abs(t.center_x() - box.center_x()) <= 0.5);
            CHECK(std::abs(t.center_y() - box.center_y()) <= 0.5);
        }
    }
    SUBCASE("image center is a fixed point") {
        const Rect box{40, 45, 60, 55};
        CHECK(place_image_center(box, {30, 15}, {100, 100}, 1.5) == place_component_center(box, {30, 15}));
    }
    SUBCASE("100x100 image, center (70,50), rate 1.5") {
        const Rect t = place_image_center({65, 45, 75, 55}, {16, 16}, {100, 100}, 1.5);
        CHECK(t == Rect{72, 42, 88, 58});
        CHECK(t.center_x() == 80.0);
        CHECK(t.center_y() == 50.0);
    }
    SUBCASE("center (95,50) at 1.5 moves to 117.5 and is clipped away") {
        const Rect t = place_image_center({93, 48, 97, 52}, {6, 6}, {100, 100}, 1.5);
        CHECK(t == Rect{115, 47, 121, 53});
        CHECK(t.center_x() == 118.0);
        CHECK(t.intersect({0, 0, 100, 100}).empty());
    }
}

TEST_CASE("compose") {
    const Raster base = testutil::random_raster(12, 12, 9);

    SUBCASE("disjoint components are priority-independent") {
        const std::vector<PlacedComponent> parts{
            {testutil::random_raster(3, 3, 1), Mask(3, 3, true), {0, 0, 3, 3}},
            {testutil::random_raster(4, 2, 2), testutil::random_mask(4, 2, 0.5, 3), {6, 6, 10, 8}}};
        CHECK(compose(base, parts, Priority::UpperLeft).image == compose(base, parts, Priority::LowerRight).image);
    }

    SUBCASE("two overlapping glyphs") {
        const Raster a(5, 5, {255, 0, 0});
        const Raster b(5, 5, {0, 0, 255});
        const std::vector<PlacedComponent> parts{{a, Mask(5, 5, true), {2, 2, 7, 7}},
                                                 {b, Mask(5, 5, true), {5, 2, 10, 7}}};
        const Composite ul = compose(base, parts, Priority::UpperLeft);
        const Composite lr = compose(base, parts, Priority::LowerRight);
        for (int y = 2; y < 7; ++y)
            for (int x = 5; x < 7; ++x) {
                CHECK(ul.image.at(x, y) == Rgb{255, 0, 0});
                CHECK(lr.image.at(x, y) == Rgb{0, 0, 255});
            }
        CHECK(ul.visible == std::vector<std::size_t>{25, 15});
        CHECK(lr.visible == std::vector<std::size_t>{15, 25});
        CHECK(ul.mask == lr.mask);
        CHECK(ul.mask.popcount() == 40);
    }

    SUBCASE("random scenes match the brute-force arbiter") {
        for (std::uint64_t seed = 0; seed < 60; ++seed) {
            Rng rng(seed);
            std::vector<PlacedComponent> parts;
            std::vector<oracle::Layer> layers;
            const int n = rng.uniform_int(1, 5);
            for (int k = 0; k < n; ++k) {
                const int w = rng.uniform_int(1, 8), h = rng.uniform_int(1, 8);
                const int x0 = rng.uniform_int(-4, 12), y0 = rng.uniform_int(-4, 12);
                const Raster px = testutil::random_raster(w, h, seed * 17 + k);
                const Mask m = testutil::random_mask(w, h, 0.7, seed * 19 + k);
                parts.push_back({px, m, {x0, y0, x0 + w, y0 + h}});
                layers.push_back({px, m, {x0, y0, x0 + w, y0 + h}});
            }
            for (bool first : {true, false}) {
                const Composite c = compose(base, parts, first ? Priority::UpperLeft : Priority::LowerRight);
                CHECK(c.image == oracle::arbitrate(base, layers, first));
                std::size_t total = 0;
                for (std::size_t k = 0; k < parts.size(); ++k) {
                    CHECK(c.visible[k] <= parts[k].mask.popcount());
                    total += c.visible[k];
                }
                CHECK(total == c.mask.popcount());
            }
        }
    }

    SUBCASE("mismatched sizes") {
        const std::vector<PlacedComponent> parts{{Raster(3, 3), Mask(3, 2, true), {0, 0, 3, 3}}};
        CHECK_THROWS_AS(compose(base, parts, Priority::UpperLeft), ValidationError);
    }
}

TEST_CASE("magnify_scene") {
    SUBCASE("rate 1.0 component-center reproduces the input") {
        for (std::uint64_t seed = 0; seed < 15; ++seed) {
            const Raster img = testutil::random_raster(40, 30, seed + 500);
            const SceneAnnotation ann = random_scene(seed, {40, 30}, 5, 10);
            CHECK(magnify_scene(img, ann, {1.0, Strategy::ComponentCenter, {}}).image == img);
        }
    }

    SUBCASE("text-free image is unchanged by every strategy") {
        const Raster img = testutil::random_raster(20, 16, 4);
        for (Strategy s :
             {Strategy::ComponentCenter, Strategy::RectLowerRight, Strategy::ImageCenter, Strategy::DetectionPaste})
            CHECK(magnify_scene(img, testutil::scene({20, 16}, {}), {1.5, s, {}}).image == img);
    }

    SUBCASE("changes stay inside the text, its ring and the magnified mask") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Raster img = testutil::random_raster(48, 32, seed + 700);
            const SceneAnnotation ann = random_scene(seed + 100, {48, 32}, 4, 12);
            for (Strategy s : {Strategy::ComponentCenter, Strategy::RectLowerRight, Strategy::ImageCenter,
                               Strategy::DetectionPaste}) {
                for (double rate : {1.2, 1.5}) {
                    const MagnifyConfig cfg{rate, s, {}};
                    const MagnifiedScene out = magnify_scene(img, ann, cfg);
                    Mask allowed = dilate(union_mask(ann), cfg.inpaint.dilation_radius);
                    allowed |= out.magnified_union_mask;
                    for (int y = 0; y < 32; ++y)
                        for (int x = 0; x < 48; ++x)
                            if (!allowed.get(x, y)) REQUIRE(out.image.at(x, y) == img.at(x, y));
                }
            }
        }
    }

    SUBCASE("bookkeeping") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const Raster img = testutil::random_raster(40, 30, seed + 900);
            const SceneAnnotation ann = random_scene(seed + 200, {40, 30}, 5, 12);
            const MagnifiedScene out = magnify_scene(img, ann, {1.5, Strategy::ComponentCenter, {}});
            REQUIRE(out.per_char.size() == ann.characters.size());
            std::size_t visible = 0;
            for (std::size_t k = 0; k < ann.characters.size(); ++k) {
                const CharPlacement &p = out.per_char[k];
                CHECK(p.original == ann.characters[k].bbox);
                CHECK(std::abs(p.target.center_x() - p.original.center_x()) <= 0.5);
                CHECK(std::abs(p.target.center_y() - p.original.center_y()) <= 0.5);
                CHECK(p.visible_pixels <= p.scaled_pixels);
                REQUIRE(p.clipped.has_value());
                CHECK(*p.clipped == p.target.intersect(img.bounds()));
                visible += p.visible_pixels;
            }
            CHECK(visible == out.magnified_union_mask.popcount());
            CHECK(out.erased == erase_text(img, ann, {}));
            CHECK(out.components.mask == union_mask(ann));
        }
    }

    SUBCASE("image-center equals component-center when boxes sit on the image center") {
        const Raster img = testutil::random_raster(41, 31, 77);
        std::vector<CharAnnotation> chars;
        for (int k = 0; k < 3; ++k) {
            const int half_w = 2 + k, half_h = 3 + k;
            const Rect box{20 - half_w, 15 - half_h, 21 + half_w, 16 + half_h};
            Mask m = testutil::random_mask(box.width(), box.height(), 0.5, 80 + k);
            m.set(0, 0, true);
            chars.push_back({std::nullopt, box, m});
        }
        const SceneAnnotation ann = testutil::scene({41, 31}, chars);
        for (double rate : {1.2, 1.5, 2.0}) {
            CHECK(magnify_scene(img, ann, {rate, Strategy::ImageCenter, {}}).image ==
                  magnify_scene(img, ann, {rate, Strategy::ComponentCenter, {}}).image);
        }
    }

    SUBCASE("image-center can push characters off the image") {
        const Raster img = testutil::random_raster(100, 100, 3);
        const SceneAnnotation ann = testutil::scene({100, 100}, {solid_char({93, 48, 97, 52})});
        const MagnifiedScene out = magnify_scene(img, ann, {1.5, Strategy::ImageCenter, {}});
        CHECK_FALSE(out.per_char[0].clipped.has_value());
        CHECK(out.per_char[0].visible_pixels == 0);
    }

    SUBCASE("size mismatch and bad config") {
        const Raster img(10, 10);
        CHECK_THROWS_AS(magnify_scene(img, testutil::scene({11, 10}, {}), {}), ValidationError);
        CHECK_THROWS_AS(magnify_scene(img, testutil::scene({10, 10}, {}), {0.0, Strategy::ComponentCenter, {}}),
                        ValidationError);
    }
}

TEST_CASE("detection_paste_baseline") {
    SUBCASE("rate 1.0 is identity") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Raster img = testutil::random_raster(30, 20, seed);
            CHECK(detection_paste_baseline(img, random_scene(seed, {30, 20}, 4, 8), 1.0) == img);
        }
    }

    SUBCASE("matches the detection-paste strategy") {
        const Raster img = testutil::random_raster(30, 20, 12);
        const SceneAnnotation ann = random_scene(12, {30, 20}, 4, 8);
        CHECK(detection_paste_baseline(img, ann, 1.5) ==
              magnify_scene(img, ann, {1.5, Strategy::DetectionPaste, {}}).image);
    }

    SUBCASE("hides an adjacent background object") {
        SynthSpec spec;
        spec.seed = 4;
        spec.image_size = {96, 48};
        spec.char_count_min = spec.char_count_max = 3;
        spec.glyph_scale_min = spec.glyph_scale_max = 3;
        spec.distractor_count = 2;
        spec.distractor_placement = DistractorPlacement::Adjacent;
        spec.flat_background = true;
        const SynthScene s = synth_scene(spec);
        const Raster out = detection_paste_baseline(s.image, s.annotation, 1.5);
        const Mask text = union_mask(s.annotation);

        // On a flat background every plate pixel off the background color is an object pixel.
        const Rgb bg = s.plate.at(0, 0);
        std::size_t object_pixels = 0, changed_outside_text = 0;
        for (int y = 0; y < s.image.height(); ++y)
            for (int x = 0; x < s.image.width(); ++x) {
                if (s.plate.at(x, y) == bg || text.get(x, y)) continue;
                ++object_pixels;
                if (out.at(x, y) != s.image.at(x, y)) ++changed_outside_text;
            }
        REQUIRE(object_pixels > 0);
        CHECK(changed_outside_text > 0);
    }

    SUBCASE("isolated solid character on flat background matches component-center") {
        Raster img(40, 30, {60, 120, 180});
        const Rect box{15, 10, 25, 20};
        for (int y = box.y0; y < box.y1; ++y)
            for (int x = box.x0; x < box.x1; ++x) img.at(x, y) = {240, 30, 10};
        const SceneAnnotation ann = testutil::scene({40, 30}, {solid_char(box)});
        for (double rate : {1.2, 1.5}) {
            const Raster base = detection_paste_baseline(img, ann, rate);
            const MagnifiedScene cc = magnify_scene(img, ann, {rate, Strategy::ComponentCenter, {}});
            const Rect t = cc.per_char[0].target;
            for (int y = t.y0; y < t.y1; ++y)
                for (int x = t.x0; x < t.x1; ++x) {
                    const Rgb a = base.at(x, y), b = cc.image.at(x, y);
                    CHECK(std::abs(a.r - b.r) <= 2);
                    CHECK(std::abs(a.g - b.g) <= 2);
                    CHECK(std::abs(a.b - b.b) <= 2);
                }
        }
    }

    SUBCASE("isolated glyph: differences confined to the glyph edge") {
        Raster img(40, 30, {60, 120, 180});
        Mask glyph(8, 10);
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 8; ++x) glyph.set(x, y, x < 3 || y >= 7);
        const Rect box{16, 10, 24, 20};
        for (int y = 0; y < 10; ++y)
            for (int x = 0; x < 8; ++x)
                if (glyph.get(x, y)) img.at(box.x0 + x, box.y0 + y) = {240, 30, 10};
        const SceneAnnotation ann = testutil::scene({40, 30}, {CharAnnotation{"L", box, glyph}});
        const Raster base = detection_paste_baseline(img, ann, 1.5);
        const MagnifiedScene cc = magnify_scene(img, ann, {1.5, Strategy::ComponentCenter, {}});
        const Mask &m = cc.magnified_union_mask;
        const Mask edge = [&] {
            Mask inv(m.width(), m.height());
            for (int y = 0; y < m.height(); ++y)
                for (int x = 0; x < m.width(); ++x) inv.set(x, y, !m.get(x, y));
            Mask e = dilate(inv, 1);
            const Mask grown = dilate(m, 1);
            for (int y = 0; y < m.height(); ++y)
                for (int x = 0; x < m.width(); ++x) e.set(x, y, e.get(x, y) && grown.get(x, y));
            return e;
        }();
        const Rect t = cc.per_char[0].target;
        for (int y = t.y0; y < t.y1; ++y)
            for (int x = t.x0; x < t.x1; ++x) {
                const Rgb a = base.at(x, y), b = cc.image.at(x, y);
                const int d = std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
                if (d > 2) CHECK(edge.get(x, y));
            }
    }
}
