#pragma once
// Prompt templates used for generation, extraction, reflection, response and
// judging. The canonical copies live under prompts/ in the repository root;
// the constants below must stay byte-identical to those files (checked by the
// acceptance suite). Do not reflow or re-indent these literals.

#include <string_view>

namespace sgmem::prompts {

inline constexpr std::string_view kResponsePrompt = R"TPL(---Role---

You are a helpful assistant responding to questions about data provided.

---Goal---

Generate a response of the target length and format that responds to the user's question, summarizing all information in the input data appropriate for the response length and format, and incorporating any relevant general knowledge.
If you don't know the answer, just say so. Do not make anything up.
Do not include information where the supporting evidence for it is not provided.

---Target response length and format---

Multiple Paragraphs

Add sections and commentary to the response as appropriate for the length and format. Style the response in markdown.)TPL";

inline constexpr std::string_view kEvaluationPrompt = R"TPL(---Role---

You are a helpful evaluation assistant.
You will be given a question, a gold-standard answer, and a candidate answer generated via retrieval-augmented generation (RAG).

---Goal---

Evaluate the candidate answer against the gold-standard answer based on factual accuracy and completeness in answering the question.

Scoring Criteria:
- score=1 (Correct): The candidate answer is factually accurate and fully or reasonably paraphrases the gold-standard answer.
- score=0 (Incorrect): The candidate answer is factually incorrect, irrelevant, incomplete, or does not answer the question.

---Output Format---

Provide your evaluation in the following JSON format:

```json
{
  "score": X
}
```
where X is either 1 or 0.)TPL";

inline constexpr std::string_view kSummaryPrompt = R"TPL(---Role---

You are a helpful summarization assistant.

---Goal---

Please summarize the following dialogue as concisely as possible, extracting the main themes and key information. If there are multiple key events, you may summarize them separately.)TPL";

inline constexpr std::string_view kFactPrompt = R"TPL(--- Role ---

You are a precise and helpful fact extraction assistant.
You will be given a list of conversation messages between a human user and an AI assistant. 

--- Goal ---

Extract **all explicit personal facts** about the human user, including but not limited to:
- Life events (past, present, or planned)
- Personal experiences
- Preferences and interests
- Relationships and interactions with people
- Numbers, dates, locations, organizations, and other concrete details

Each extracted fact must:
1. Be a **standalone, self-contained sentence**.
2. Avoid pronouns (replace "I", "my", "she", "they" with explicit entities, e.g., "The user", "Maya", "Jake Watson").
3. Preserve all available details (time, place, quantity, frequency, etc.).
4. Remain strictly factual (do not infer, summarize, or speculate beyond the given text).

If no personal facts are found, output an empty list.

--- Output Format ---

Return the facts as a JSON list of strings, where each string is one fact:

```json
["fact 1", "fact 2", "fact 3"]
```)TPL";

inline constexpr std::string_view kInsightPrompt = R"TPL(--- Role ---

You are a precise and helpful fact reflection assistant.  
You will be given a list of factual records about a human user.  

--- Goal ---

Your task is to analyze the provided user memories and generate higher-level, insightful reflections.  

--- Analysis and Reflection Rules ---

- Carefully read the memory entries and identify recurring themes, behaviors, or connections.  
- Multiple related memory entries may be **merged into a single insight** if they collectively represent a pattern or habit (e.g., repeated actions --> user habit).  
- The `timestamp` of the generated insight should be the **latest timestamp** among the merged memory entries.
- Reflect and summarize to generate higher-level insights such as user preferences, habits, routines, opinions, goals, or current status.   
- Each insight should be concise, self-contained, and written as a standalone statement.  
- Do not copy the input facts directly; instead, abstract them into meaningful patterns or insights.  
- Do not include any explanations, metadata, or comments outside of the JSON output.  

--- Input Format ---

A list of user memories, each containing a timestamp and content:

[
  {'timestamp': '', 'content': ''},
  {'timestamp': '', 'content': ''},
  {'timestamp': '', 'content': ''},
  ...
]

--- Output Format ---

Return the insights as a **JSON list of objects**.  
Each object must have:  
- `timestamp`: the latest timestamp among the related memory entries  
- `content`: the generated insight  

```json
[
  {'timestamp': '', 'content': ''},
  {'timestamp': '', 'content': ''},
  ...
]
```)TPL";

}  // namespace sgmem::prompts
