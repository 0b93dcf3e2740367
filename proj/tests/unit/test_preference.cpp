#include <doctest.h>

#include <numeric>

#include "permstab/error.hpp"
#include "permstab/preference.hpp"

using namespace permstab;

namespace {

AnswerProfile profile(std::vector<AnswerEntry> entries, bool gold_in_docs, std::vector<std::string> gold = {"1913"}) {
  AnswerProfile p;
  p.query_id = "q1";
  p.query = "when was the cat and mouse act introduced?";
  p.documents = {"doc A", "doc B", "doc C"};
  p.gold_answers = std::move(gold);
  p.gold_in_docs = gold_in_docs;
  p.entries = std::move(entries);
  return p;
}

}  // namespace

TEST_CASE("gold_in_documents") {
  CHECK(gold_in_documents({"Paris"}, {"...the capital, Paris, is..."}));
  CHECK_FALSE(gold_in_documents({"Paris"}, {"London is large.", "The Thames flows."}));
  CHECK(gold_in_documents({"paris"}, {"PARIS"}));
}

TEST_CASE("categorize") {
  CHECK(categorize(profile({{"1913", 120, true}}, false)) == Category::FC);
  CHECK(categorize(profile({{"1913", 70, true}, {"1915", 50, false}}, true)) == Category::PC);
  CHECK(categorize(profile({{"1915", 120, false}}, false)) == Category::FU);
  CHECK(categorize(profile({{"1915", 120, false}}, true)) == Category::FA);
}

TEST_CASE("categories partition every flag combination") {
  // any-correct x all-correct x gold-in-docs; all-correct implies any-correct
  // for a non-empty profile, so the two impossible rows collapse.
  for (int any = 0; any < 2; ++any)
    for (int all = 0; all < 2; ++all)
      for (int docs = 0; docs < 2; ++docs) {
        std::vector<AnswerEntry> entries;
        if (all) {
          entries = {{"1913", 2, true}};
        } else if (any) {
          entries = {{"1913", 2, true}, {"1915", 1, false}};
        } else {
          entries = {{"1915", 3, false}};
        }
        const Category c = categorize(profile(entries, docs != 0));
        if (all) {
          CHECK(c == Category::FC);
        } else if (any) {
          CHECK(c == Category::PC);
        } else {
          CHECK(c == (docs ? Category::FA : Category::FU));
        }
      }
}

TEST_CASE("build_preference") {
  SUBCASE("FC is excluded") { CHECK_FALSE(build_preference(profile({{"1913", 120, true}}, true)).has_value()); }
  SUBCASE("PC prefers the heaviest correct answer") {
    const auto t = build_preference(profile({{"1913", 70, true}, {"1915", 50, false}}, true));
    REQUIRE(t);
    CHECK(t->y_w == "1913");
    CHECK(t->y_l == "1915");
    CHECK(t->category == Category::PC);
    CHECK(t->documents == std::vector<std::string>{"doc A", "doc B", "doc C"});
  }
  SUBCASE("FU prefers abstention") {
    const auto t = build_preference(profile({{"1912", 20, false}, {"1915", 100, false}}, false));
    REQUIRE(t);
    CHECK(t->y_w == "I don't know");
    CHECK(t->y_l == "1915");
    CHECK(t->category == Category::FU);
  }
  SUBCASE("FA prefers the first gold answer") {
    const auto t = build_preference(profile({{"1915", 120, false}}, true, {"1913", "April 1913"}));
    REQUIRE(t);
    CHECK(t->y_w == "1913");
    CHECK(t->y_l == "I don't know");
    CHECK(t->category == Category::FA);
  }
  SUBCASE("weight ties go to the earlier entry") {
    const auto t = build_preference(profile({{"1913", 10, true}, {"zzz", 30, false}, {"aaa", 30, false}}, false));
    REQUIRE(t);
    CHECK(t->y_l == "zzz");
  }
  SUBCASE("chosen permutation orders the documents") {
    auto p = profile({{"1913", 70, true}, {"1915", 50, false}}, true);
    p.chosen_permutation = {2, 0, 1};
    CHECK(build_preference(p)->documents == std::vector<std::string>{"doc C", "doc A", "doc B"});
  }
  SUBCASE("FU whose only wrong answer is the abstention") {
    try {
      build_preference(profile({{"I don't know", 120, false}}, false));
      FAIL("expected NoIncorrectCandidate");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoIncorrectCandidate);
    }
  }
  SUBCASE("identical profiles give identical tuples") {
    const auto p = profile({{"1913", 5, true}, {"1915", 5, false}, {"1914", 5, false}}, true);
    CHECK(*build_preference(p) == *build_preference(p));
  }
}

namespace {

HiddenStateBundle answer_bundle(std::size_t count) {
  HiddenStateBundle b;
  b.query_id = "q";
  b.query = "when?";
  b.documents = {"d0", "d1", "d2", "d3", "d4"};
  b.gold_answers = {"Paris"};
  b.permutations = lexicographic_permutations(5, count);
  b.states = DenseMatrix(count, 1);
  return b;
}

}  // namespace

TEST_CASE("profile_from_partition") {
  SUBCASE("representative mode merges identical answers") {
    auto b = answer_bundle(120);
    ModePartition p;
    p.k = 3;
    p.cluster_sizes = {70, 30, 20};
    RepresentativeSet reps;
    reps.clusters = {{0, {}, 0, "Paris"}, {1, {}, 1, "Rome"}, {2, {}, 2, "Rome"}};
    const auto prof = profile_from_partition(p, reps, b);
    CHECK(prof.entries == std::vector<AnswerEntry>{{"Paris", 70, true}, {"Rome", 50, false}});
    CHECK(categorize(prof) == Category::PC);
  }
  SUBCASE("exhaustive mode counts every permutation") {
    auto b = answer_bundle(120);
    b.answers.emplace();
    for (std::size_t i = 0; i < 120; ++i) b.answers->push_back(i < 90 ? "Paris" : (i % 2 ? "Rome" : "Lyon"));
    const auto prof = profile_from_partition(ModePartition{}, RepresentativeSet{}, b, ProfileMode::Exhaustive);
    CHECK(prof.entries.front() == AnswerEntry{"Paris", 90, true});
    std::size_t total = 0;
    for (const auto& e : prof.entries) total += e.weight;
    CHECK(total == 120);
  }
  SUBCASE("single cluster") {
    auto b = answer_bundle(6);
    ModePartition p;
    p.k = 1;
    p.cluster_sizes = {6};
    RepresentativeSet reps;
    reps.clusters = {{0, {}, 3, "Rome"}};
    const auto prof = profile_from_partition(p, reps, b);
    CHECK(prof.entries == std::vector<AnswerEntry>{{"Rome", 6, false}});
  }
  SUBCASE("missing representative answer") {
    auto b = answer_bundle(6);
    ModePartition p;
    p.k = 1;
    p.cluster_sizes = {6};
    RepresentativeSet reps;
    reps.clusters = {{0, {}, 3, std::nullopt}};
    try {
      profile_from_partition(p, reps, b);
      FAIL("expected MissingRepresentativeAnswer");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingRepresentativeAnswer);
    }
  }
}

TEST_CASE("y_w is correct for PC and FA tuples") {
  const std::vector<std::string> gold{"1913", "April 1913"};
  for (int docs = 0; docs < 2; ++docs) {
    for (auto entries : {std::vector<AnswerEntry>{{"in 1913", 4, true}, {"1915", 9, false}},
                         std::vector<AnswerEntry>{{"1915", 9, false}, {"1916", 2, false}}}) {
      const auto t = build_preference(profile(entries, docs != 0, gold));
      REQUIRE(t);
      if (t->category == Category::FU) {
        CHECK(t->y_w == "I don't know");
      } else {
        CHECK(sub_em(t->y_w, gold) == 1);
      }
      CHECK(t->y_w != t->y_l);
    }
  }
}
