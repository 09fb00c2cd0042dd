#include <catch2/catch_amalgamated.hpp>

#include <sgmem/memory_generation.hpp>

#include "testutil.hpp"

using namespace sgmem;

static ConversationCorpus trip_corpus() {
  ConversationCorpus corpus;
  add_session(corpus,
              {{Speaker::User, "I want to plan a trip.", ""},
               {Speaker::Assistant, "Where to?", ""},
               {Speaker::User, "Oslo in June.", ""},
               {Speaker::Assistant, "Nice choice.", ""}},
              "s0", "2023-06-01T10:00:00");
  return corpus;
}

TEST_CASE("scripted summary passes through") {
  auto corpus = trip_corpus();
  MockLlm llm;
  llm.script(build_summary_prompt(corpus, corpus.sessions[0]),
             "User plans a trip.");
  auto summary = generate_summary(llm, corpus, corpus.sessions[0]);
  REQUIRE(summary.kind == MemoryKind::Summary);
  REQUIRE(summary.content == "User plans a trip.");
  REQUIRE(summary.source_session_id == "s0");
  REQUIRE(summary.timestamp == "2023-06-01T10:00:00");
  REQUIRE(summary.id == "summary_s0");
}

TEST_CASE("one summary per session regardless of round count") {
  auto corpus = trip_corpus();
  MockLlm llm;
  llm.set_fallback("short summary");
  auto all = generate_all_memories(llm, corpus, true, false, false);
  size_t summaries = 0;
  for (const auto& m : all) {
    if (m.kind == MemoryKind::Summary) ++summaries;
  }
  REQUIRE(summaries == 1);
}

TEST_CASE("empty summary completion is an error") {
  auto corpus = trip_corpus();
  MockLlm llm;
  llm.set_fallback("   ");
  REQUIRE_THROWS_AS(generate_summary(llm, corpus, corpus.sessions[0]),
                    EmptyCompletion);
}

TEST_CASE("fact extraction parses a JSON list of strings") {
  auto corpus = trip_corpus();
  MockLlm llm;
  llm.script(build_fact_prompt(corpus, corpus.sessions[0]),
             R"(["The user lives in Oslo."])");
  auto facts = extract_facts(llm, corpus, corpus.sessions[0]);
  REQUIRE(facts.size() == 1);
  REQUIRE(facts[0].content == "The user lives in Oslo.");
  REQUIRE(facts[0].id == "fact_s0_0");
  REQUIRE(facts[0].timestamp == "2023-06-01T10:00:00");
}

TEST_CASE("an empty fact list is valid") {
  auto corpus = trip_corpus();
  MockLlm llm;
  llm.script(build_fact_prompt(corpus, corpus.sessions[0]), "[]");
  REQUIRE(extract_facts(llm, corpus, corpus.sessions[0]).empty());
}

TEST_CASE("code-fenced fact lists are repaired") {
  auto corpus = trip_corpus();
  MockLlm llm;
  llm.script(build_fact_prompt(corpus, corpus.sessions[0]),
             "```json\n[\"The user visits Oslo in June.\"]\n```");
  auto facts = extract_facts(llm, corpus, corpus.sessions[0]);
  REQUIRE(facts.size() == 1);
  REQUIRE(facts[0].content == "The user visits Oslo in June.");
}

static std::vector<GeneratedMemory> running_facts() {
  std::vector<GeneratedMemory> facts;
  const char* days[] = {"Monday", "Wednesday", "Friday"};
  const char* stamps[] = {"2023-01-02T07:00:00", "2023-01-04T07:00:00",
                          "2023-01-06T07:00:00"};
  for (int i = 0; i < 3; ++i) {
    GeneratedMemory f;
    f.id = "fact_s0_" + std::to_string(i);
    f.kind = MemoryKind::Fact;
    f.source_session_id = "s0";
    f.content = std::string("The user runs on ") + days[i] + ".";
    f.timestamp = stamps[i];
    facts.push_back(std::move(f));
  }
  return facts;
}

TEST_CASE("insights carry the latest merged timestamp") {
  auto facts = running_facts();
  MockLlm llm;
  llm.script(build_insight_prompt(facts),
             R"([{"timestamp": "2023-01-06T07:00:00", "content": "The user runs regularly."}])");
  auto insights = reflect_insights(llm, facts);
  REQUIRE(insights.size() == 1);
  REQUIRE(insights[0].content == "The user runs regularly.");
  REQUIRE(insights[0].timestamp == "2023-01-06T07:00:00");
  for (const auto& f : facts) {
    REQUIRE(insights[0].timestamp >= f.timestamp);
  }
}

TEST_CASE("empty insight list yields no insights") {
  auto facts = running_facts();
  MockLlm llm;
  llm.script(build_insight_prompt(facts), "[]");
  REQUIRE(reflect_insights(llm, facts).empty());
}

TEST_CASE("malformed insight completion raises after the repair attempt") {
  auto facts = running_facts();
  MockLlm llm;
  llm.script(build_insight_prompt(facts), "{not json");
  REQUIRE_THROWS_AS(reflect_insights(llm, facts), MalformedJson);
}

TEST_CASE("generation pipeline skips malformed sessions with a warning") {
  ConversationCorpus corpus;
  add_session(corpus, {{Speaker::User, "Good text.", ""}}, "s0",
              "2023-01-01T00:00:00");
  add_session(corpus, {{Speaker::User, "Bad text.", ""}}, "s1",
              "2023-01-02T00:00:00");
  MockLlm llm;
  llm.script(build_fact_prompt(corpus, corpus.sessions[0]),
             R"(["The user wrote good text."])");
  llm.script(build_fact_prompt(corpus, corpus.sessions[1]), "certainly not json");
  std::vector<std::string> warnings;
  auto all = generate_all_memories(llm, corpus, false, true, false,
                                   [&](const std::string& w) {
                                     warnings.push_back(w);
                                   });
  REQUIRE(all.size() == 1);
  REQUIRE(warnings.size() == 1);
  REQUIRE(warnings[0].find("s1") != std::string::npos);
}

TEST_CASE("mock-driven generation is deterministic") {
  auto corpus = trip_corpus();
  MockLlm llm;
  llm.script(build_summary_prompt(corpus, corpus.sessions[0]), "Trip summary.");
  llm.script(build_fact_prompt(corpus, corpus.sessions[0]),
             R"(["The user plans an Oslo trip in June."])");
  std::vector<GeneratedMemory> facts;
  {
    GeneratedMemory f;
    f.id = "fact_s0_0";
    f.kind = MemoryKind::Fact;
    f.source_session_id = "s0";
    f.content = "The user plans an Oslo trip in June.";
    f.timestamp = "2023-06-01T10:00:00";
    facts.push_back(std::move(f));
  }
  llm.script(build_insight_prompt(facts),
             R"([{"timestamp": "2023-06-01T10:00:00", "content": "The user enjoys travel."}])");

  auto run = [&] { return generate_all_memories(llm, corpus, true, true, true); };
  auto a = run();
  auto b = run();
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].id == b[i].id);
    REQUIRE(a[i].content == b[i].content);
  }
  REQUIRE(a.size() == 3);  // 1 summary + 1 fact + 1 insight
}
