#include <doctest.h>

#include <cmath>
#include <sstream>

#include "moodpulse/error.hpp"
#include "moodpulse/labeling.hpp"

using namespace moodpulse;
using C = AffectCategory;

TEST_CASE("taxonomy") {
    CHECK(all_categories().size() == 21);
    std::size_t moral = 0;
    for (auto c : all_categories()) {
        CHECK(parse_category(category_name(c)) == c);
        moral += category_kind(c) == AffectKind::moral;
    }
    CHECK(moral == 10);
    CHECK_FALSE(parse_category("positive").has_value());
}

TEST_CASE("lexicon matching") {
    std::istringstream in("fear\tfear\t1\nscared\tfear\t1\ncalm\tfear\t0\ngood\tpositive\t1\n");
    auto lex = Lexicon::load(in);
    CHECK(lex.words(C::fear).size() == 2);
    CHECK_FALSE(lex.has(C::love));

    std::vector<std::string> tokens{"i", "fear", "this"};
    auto v = label_with_lexicon(tokens, lex);
    CHECK(v.test(C::fear));
    CHECK(v.count() == 1);

    CHECK(label_with_lexicon(std::vector<std::string>{}, lex).none());
    CHECK(label_with_lexicon(std::vector<std::string>{"love"}, lex).none());
}

TEST_CASE("lexicon labeling is monotone in tokens") {
    std::istringstream in("fear\tfear\nhappy\tjoy\nrage\tanger\n");
    auto lex = Lexicon::load(in);
    std::vector<std::string> tokens{"happy"};
    auto before = label_with_lexicon(tokens, lex);
    tokens.push_back("rage");
    auto after = label_with_lexicon(tokens, lex);
    for (auto c : all_categories())
        if (before.test(c)) CHECK(after.test(c));
}

TEST_CASE("lexicon rejects malformed lines") {
    std::istringstream in("word\n");
    CHECK_THROWS_AS(Lexicon::load(in), ParseError);
    std::istringstream bad_flag("word\tfear\t2\n");
    CHECK_THROWS_AS(Lexicon::load(bad_flag), ParseError);
}

namespace {

WordVectorTable table2d() {
    WordVectorTable t(2);
    t.insert("a", {1.0, 0.0});
    t.insert("b", {0.0, 1.0});
    t.insert("c", {1.0, 0.0});
    return t;
}

}  // namespace

TEST_CASE("DDR cosine") {
    auto t = table2d();
    std::vector<std::string> doc{"a", "b"};
    auto s = ddr_score(doc, {"c"}, t);
    REQUIRE(s);
    CHECK(*s == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    auto same = ddr_score(std::vector<std::string>{"a"}, {"c"}, t);
    CHECK(*same == doctest::Approx(1.0));
    auto orth = ddr_score(std::vector<std::string>{"b"}, {"c"}, t);
    CHECK(*orth == doctest::Approx(0.0));

    CHECK_FALSE(ddr_score(std::vector<std::string>{"zzz"}, {"c"}, t).has_value());
}

TEST_CASE("DDR is invariant under positive scaling of the table") {
    WordVectorTable t(3), s(3);
    const std::vector<std::pair<std::string, std::vector<double>>> rows = {
        {"x", {0.3, -1.2, 0.5}}, {"y", {1.1, 0.4, -0.7}}, {"z", {-0.2, 0.9, 0.8}}};
    for (const auto& [w, v] : rows) {
        t.insert(w, v);
        std::vector<double> scaled;
        for (double e : v) scaled.push_back(4.0 * e);
        s.insert(w, scaled);
    }
    std::vector<std::string> doc{"x", "y"};
    CHECK(*ddr_score(doc, {"z"}, t) == *ddr_score(doc, {"z"}, s));
}

TEST_CASE("DDR labeler thresholds and coverage") {
    auto t = table2d();
    Lexicon dict;
    dict.add(C::fear, "c");
    dict.add(C::joy, "b");
    DDRLabeler lab(dict, t, DDRConfig{0.9, 1});
    auto v = lab.label(std::vector<std::string>{"a"});
    CHECK(v.test(C::fear));
    CHECK_FALSE(v.test(C::joy));
    CHECK(lab.label(std::vector<std::string>{"nothing"}).none());
}

TEST_CASE("word vector loading") {
    std::istringstream in("3 2\na 1 0\nb 0 1\nc 1 0\n");
    auto t = WordVectorTable::load(in);
    CHECK(t.dim() == 2);
    CHECK(t.size() == 3);
    std::istringstream ragged("a 1 0\nb 1\n");
    CHECK_THROWS_AS(WordVectorTable::load(ragged), ParseError);
}

TEST_CASE("label file loading") {
    std::istringstream one("id,fear\na,1\n");
    auto t = load_labels(one);
    REQUIRE(t.labels.count("a"));
    CHECK(t.labels.at("a").test(C::fear));
    CHECK(t.labels.at("a").count() == 1);

    std::istringstream empty("");
    CHECK(load_labels(empty).labels.empty());

    std::istringstream conflict("id,fear,joy\na,1,0\na,0,1\n");
    CHECK_THROWS_AS(load_labels(conflict), DataError);

    std::istringstream unknown("id,feer\na,1\n");
    CHECK_THROWS_AS(load_labels(unknown), ParseError);

    std::vector<std::string> ids{"a", "b"};
    std::istringstream partial("id,anger\na,1\nz,1\n");
    auto p = load_labels(partial, &ids);
    CHECK(p.unknown_ids == 1);
    CHECK(p.missing_posts == 1);
    CHECK(p.labels.at("b").none());
}

TEST_CASE("label file round trip") {
    LabelVector v;
    v.set(C::anger).set(C::purity);
    std::stringstream buf;
    write_labels(buf, {{"p,1", v}, {"p2", LabelVector{}}});
    auto t = load_labels(buf);
    CHECK(t.labels.at("p,1") == v);
    CHECK(t.labels.at("p2").none());
}

TEST_CASE("F1 arithmetic") {
    std::map<std::string, LabelVector> gold, pred;
    for (int i = 0; i < 10; ++i) {
        LabelVector v;
        if (i % 2) v.set(C::joy);
        if (i % 3 == 0) v.set(C::fear);
        gold["p" + std::to_string(i)] = v;
    }
    auto perfect = f1_scores(gold, gold);
    for (auto c : all_categories()) {
        const auto& s = perfect[index_of(c)];
        if (s.support) CHECK(s.f1 == 1.0);
    }

    for (const auto& [id, v] : gold) pred[id] = LabelVector{};
    CHECK(f1_scores(pred, gold)[index_of(C::joy)].f1 == 0.0);

    std::map<std::string, LabelVector> g2, p2;
    g2["tp"].set(C::anger);
    p2["tp"].set(C::anger);
    p2["fp"].set(C::anger);
    g2["fp"] = LabelVector{};
    g2["fn"].set(C::anger);
    p2["fn"] = LabelVector{};
    auto s = f1_scores(p2, g2)[index_of(C::anger)];
    CHECK(s.precision == 0.5);
    CHECK(s.recall == 0.5);
    CHECK(s.f1 == 0.5);

    auto swapped = f1_scores(g2, p2)[index_of(C::anger)];
    CHECK(swapped.precision == s.recall);
    CHECK(swapped.recall == s.precision);
}
