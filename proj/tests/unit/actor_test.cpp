// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "musa/actor.hpp"
#include "support.hpp"

namespace musa {
namespace {

using testing::ScriptedUnit;
using testing::text_prompt;

ActionSpec spec(ActionKind kind, const std::string& instructions = "do it", std::vector<ContentItem> inputs = {}) {
  return ActionSpec{kind, instructions, std::move(inputs)};
}

CategoryTaxonomy sample_taxonomy() {
  CategoryTaxonomy t;
  t.level1 = {"sport", "politics", "technology"};
  t.level2 = {{"sport", {"tennis", "football"}}, {"politics", {"elections", "policy"}}, {"technology", {"ai", "gadgets"}}};
  return t;
}

TEST(Builders, TitleEndsWithDirective) {
  const auto p = build_title_prompt(spec(ActionKind::TitleGeneration), text_prompt("ctx"));
  const std::string last = *p.segments.back().text;
  EXPECT_NE(last.find("TITLE: <title>"), std::string::npos);
  EXPECT_EQ(last.substr(last.size() - std::string("TITLE: <title>").size()), "TITLE: <title>");
}

TEST(Builders, VqaPreservesImagesInOrder) {
  const std::vector<ContentItem> inputs = {ContentItem::make_image("a.png", "image/png"),
                                           ContentItem::make_text("caption"),
                                           ContentItem::make_image("b.jpg", "image/jpeg")};
  const auto p = build_vqa_prompt(spec(ActionKind::VQA, "read the sign", inputs), text_prompt("ctx"));
  std::vector<std::string> images;
  for (const auto& s : p.segments)
    if (s.is_image()) images.push_back(s.image->location);
  EXPECT_EQ(images, (std::vector<std::string>{"a.png", "b.jpg"}));
  EXPECT_NE(p.segments.back().text->find("ANSWER: <answer>"), std::string::npos);
}

TEST(Builders, QaAcceptsImagesAndSkipsDuplicates) {
  const auto image = ContentItem::make_image("a.png", "image/png");
  PromptArtifact reasoned = text_prompt("ctx");
  reasoned.segments.push_back(image);
  const auto p = build_qa_prompt(spec(ActionKind::QA, "what is shown?", {image}), reasoned);
  EXPECT_EQ(std::count(p.segments.begin(), p.segments.end(), image), 1);
  EXPECT_NE(p.text().find("Action 1 (QA): Answers natural language questions about textual content\nInstructions: "
                          "what is shown?"),
            std::string::npos);
}

TEST(Builders, WrongActionRejected) {
  EXPECT_THROW(build_qa_prompt(spec(ActionKind::VQA), text_prompt("x")), WrongActionError);
  EXPECT_THROW(build_title_prompt(spec(ActionKind::QA), text_prompt("x")), WrongActionError);
  EXPECT_THROW(build_category_prompt(spec(ActionKind::QA), text_prompt("x"), {"a"}), WrongActionError);
  EXPECT_THROW(build_category_prompt(spec(ActionKind::Categorization), text_prompt("x"), {}), PreconditionError);
}

TEST(Builders, KnowledgeAndRevisionPrecedeDirective) {
  ActContext extra{{"fact one"}, "be shorter"};
  const auto p = build_title_prompt(spec(ActionKind::TitleGeneration), text_prompt("ctx"), extra);
  const std::string text = p.text();
  const auto k = text.find("Knowledge:\n- fact one");
  const auto r = text.find("Revision feedback on your previous response:\nbe shorter");
  const auto d = text.find("TITLE: <title>");
  ASSERT_NE(k, std::string::npos);
  ASSERT_NE(r, std::string::npos);
  EXPECT_LT(k, r);
  EXPECT_LT(r, d);
}

TEST(ExtractMarked, Grammar) {
  EXPECT_EQ(extract_marked("blah\nANSWER: 42", "ANSWER:"), "42");
  EXPECT_EQ(extract_marked("**Answer:** Paris", "ANSWER:"), "Paris");
  EXPECT_EQ(extract_marked("ANSWER: a\nANSWER: b", "ANSWER:"), "b");
  EXPECT_EQ(extract_marked("no marker", "ANSWER:"), std::nullopt);
  EXPECT_EQ(extract_marked("ANSWER:   ", "ANSWER:"), std::nullopt);
}

TEST(MatchCategory, CaseQuotesAndDot) {
  const std::vector<std::string> names{"Sport", "politics"};
  EXPECT_EQ(match_category("sport", names), "Sport");
  EXPECT_EQ(match_category("\"Politics\".", names), "politics");
  EXPECT_EQ(match_category("astrology", names), std::nullopt);
}

TEST(KnowledgeQuery, ReadsDirectiveLine) {
  EXPECT_EQ(knowledge_query("Answer it.\nKNOWLEDGE: hashtag"), "hashtag");
  EXPECT_EQ(knowledge_query("knowledge:   misinfo  "), "misinfo");
  EXPECT_EQ(knowledge_query("no knowledge needed"), std::nullopt);
}

TEST(Act, QaExtractsAnswer) {
  ScriptedUnit u(UnitRole::Actor, {"Let me see.\nANSWER: 42"});
  const auto r = act(spec(ActionKind::QA), text_prompt("ctx"), {}, u.channel);
  EXPECT_EQ(r.answer, "42");
  EXPECT_EQ(r.action_id, 1);
  EXPECT_EQ(r.provider_calls, 1);
  EXPECT_EQ(u.calls().size(), 1u);
}

TEST(Act, FallsBackToWholeCompletionForTextActions) {
  ScriptedUnit u(UnitRole::Actor, {"  A Headline  "});
  const auto r = act(spec(ActionKind::TitleGeneration), text_prompt("ctx"), {}, u.channel);
  EXPECT_EQ(r.answer, "A Headline");
  EXPECT_EQ(r.structured, StructuredPayload{TitlePayload{"A Headline"}});
}

TEST(Act, ImagesToTextOnlyActorAreRejected) {
  ScriptedUnit u(UnitRole::Actor, {"ANSWER: x"});
  const auto s = spec(ActionKind::VQA, "read", {ContentItem::make_image("a.png", "image/png")});
  try {
    act(s, text_prompt("ctx"), {}, u.channel);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::ImageUnsupported);
  }
}

TEST(Act, FlatCategorization) {
  CategoryTaxonomy flat;
  flat.level1 = {"sport", "politics"};
  ScriptedUnit u(UnitRole::Actor, {"CATEGORY: politics", "CATEGORY: astrology"});
  const ActorResources res{nullptr, &flat};
  const auto r = act(spec(ActionKind::Categorization), text_prompt("ctx"), res, u.channel);
  EXPECT_EQ(r.answer, "politics");
  EXPECT_EQ(r.structured, (StructuredPayload{CategoryPayload{"politics", std::nullopt}}));
  EXPECT_EQ(r.provider_calls, 1);
  try {
    act(spec(ActionKind::Categorization), text_prompt("ctx"), res, u.channel);
    FAIL();
  } catch (const ActionParseError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown category"), std::string::npos);
  }
}

TEST(Act, CategorizationNeedsMarkerAndTaxonomy) {
  const auto tax = sample_taxonomy();
  ScriptedUnit u(UnitRole::Actor, {"I think sport"});
  EXPECT_THROW(act(spec(ActionKind::Categorization), text_prompt("ctx"), {nullptr, &tax}, u.channel), ActionParseError);
  EXPECT_THROW(act(spec(ActionKind::Categorization), text_prompt("ctx"), {}, u.channel), PreconditionError);
}

TEST(TwoLevel, SportTennis) {
  Transcript tr;
  ScriptedUnit u(UnitRole::Actor, {"CATEGORY: sport", "CATEGORY: tennis"}, &tr);
  const auto tax = sample_taxonomy();
  const auto r = act(spec(ActionKind::Categorization), text_prompt("ctx"), {nullptr, &tax}, u.channel);
  EXPECT_EQ(r.answer, "sport/tennis");
  EXPECT_EQ(r.provider_calls, 2);
  EXPECT_EQ(tr.call_labels(), (std::vector<std::string>{"Actor:act.level1", "Actor:act.level2"}));
  const std::string second = u.calls()[1].request.flat_text();
  EXPECT_NE(second.find("- tennis\n- football"), std::string::npos);
  EXPECT_EQ(second.find("- politics"), std::string::npos);
}

TEST(TwoLevel, NonChildRejected) {
  ScriptedUnit u(UnitRole::Actor, {"CATEGORY: sport", "CATEGORY: politics"});
  try {
    categorize_two_level(spec(ActionKind::Categorization), sample_taxonomy(), text_prompt("ctx"), u.channel);
    FAIL();
  } catch (const ActionParseError& e) {
    EXPECT_NE(std::string(e.what()).find("not a child of sport"), std::string::npos);
  }
}

TEST(TwoLevel, DegenerateTaxonomy) {
  CategoryTaxonomy t;
  t.level1 = {"only"};
  t.level2 = {{"only", {"child"}}};
  ScriptedUnit u(UnitRole::Actor, {"CATEGORY: only", "CATEGORY: child"});
  EXPECT_EQ(categorize_two_level(spec(ActionKind::Categorization), t, text_prompt("ctx"), u.channel),
            (CategoryPayload{"only", "child"}));
}

TEST(TwoLevel, HierarchySafetyProperty) {
  std::mt19937 rng(21);
  for (int round = 0; round < 300; ++round) {
    CategoryTaxonomy t;
    std::vector<std::string> all_children;
    const int n1 = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < n1; ++i) {
      const std::string parent = "p" + std::to_string(i);
      t.level1.push_back(parent);
      for (int k = 1 + static_cast<int>(rng() % 4); k > 0; --k) {
        const std::string child = parent + "c" + std::to_string(k);
        t.level2[parent].push_back(child);
        all_children.push_back(child);
      }
    }
    const std::string l1 = t.level1[rng() % t.level1.size()];
    const std::string l2 = all_children[rng() % all_children.size()];
    ScriptedUnit u(UnitRole::Actor, {"CATEGORY: " + l1, "CATEGORY: " + l2});
    try {
      const auto r = categorize_two_level(spec(ActionKind::Categorization), t, text_prompt("ctx"), u.channel);
      ASSERT_TRUE(r.level2);
      const auto& kids = t.children(r.level1);
      EXPECT_NE(std::find(kids.begin(), kids.end(), *r.level2), kids.end());
      EXPECT_EQ(t.parent_of(*r.level2), l1);
    } catch (const ActionParseError& e) {
      EXPECT_NE(t.parent_of(l2), l1);
      EXPECT_NE(std::string(e.what()).find("not a child of " + l1), std::string::npos);
    }
  }
}

TEST(Taxonomy, LoadAndValidate) {
  const auto t = CategoryTaxonomy::load(testing::fixture("categorize/taxonomy.json"));
  EXPECT_EQ(t, sample_taxonomy());
  EXPECT_TRUE(validate_taxonomy(t).ok());
  EXPECT_EQ(t.parent_of("ai"), "technology");

  CategoryTaxonomy bad = sample_taxonomy();
  bad.level2["politics"].push_back("tennis");
  bad.level2["weather"] = {"rain"};
  bad.level1.push_back("Sport");
  const auto r = validate_taxonomy(bad);
  EXPECT_TRUE(r.mentions("more than one parent"));
  EXPECT_TRUE(r.mentions("'weather' is not a level1 name"));
  EXPECT_TRUE(r.mentions("duplicate level1"));
}

TEST(ToolStoreTest, LookupSemantics) {
  const auto tools = ToolStore::load(testing::fixture("tools/knowledge.json"));
  EXPECT_EQ(lookup(tools, "community events"),
            std::vector<std::string>{"Community clean-ups are usually announced a week ahead."});
  EXPECT_EQ(lookup(tools, "MIRACLE").size(), 2u);
  EXPECT_TRUE(lookup(tools, "zzz-no-match").empty());
  EXPECT_TRUE(lookup(tools, "  ").empty());
}

TEST(ToolStoreTest, ParseErrors) {
  EXPECT_THROW(ToolStore::parse("{\"entries\": 3}"), MalformedInputError);
  EXPECT_THROW(ToolStore::parse("{\"entries\": [{\"id\": \"a\"}, {\"id\": \"a\"}]}"), MalformedInputError);
  EXPECT_THROW(ToolStore::parse("{"), MalformedInputError);
}

TEST(ToolStoreTest, LookupsNeverChangeTheStoreProperty) {
  const auto tools = ToolStore::load(testing::fixture("tools/knowledge.json"));
  const std::string before = tools.fingerprint();
  std::mt19937 rng(4);
  const char* words[] = {"hash", "post", "cure", "week", "zzz", "", "a", "Health"};
  for (int i = 0; i < 500; ++i) {
    const std::string q = words[rng() % 8];
    EXPECT_EQ(lookup(tools, q), lookup(tools, q));
  }
  EXPECT_EQ(tools.fingerprint(), before);
}

TEST(Act, KnowledgeDirectivePullsFacts) {
  const auto tools = ToolStore::load(testing::fixture("tools/knowledge.json"));
  ScriptedUnit u(UnitRole::Actor, {"ANSWER: yes"});
  act(spec(ActionKind::QA, "Is this misinformation?\nKNOWLEDGE: miracle"), text_prompt("ctx"), {&tools, nullptr},
      u.channel, "act", std::string("cite the rule"));
  const std::string body = u.calls()[0].request.flat_text();
  EXPECT_NE(body.find("- Claims of a miracle cure are a common misinformation pattern."), std::string::npos);
  EXPECT_NE(body.find("cite the rule"), std::string::npos);
}

}  // namespace
}  // namespace musa
