#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "sgmem/errors.hpp"
#include "sgmem/segmentation.hpp"

namespace sgmem {

enum class Speaker { User, Assistant };

inline const char* speaker_label(Speaker s) {
  return s == Speaker::User ? "USER" : "ASSISTANT";
}

// Timestamps are optional everywhere; empty string means absent. Ingestion
// normalizes dataset-native formats to ISO-8601 so lexicographic order is
// chronological.
struct Turn {
  std::string id;
  std::string session_id;
  size_t round_index = 0;
  Speaker speaker = Speaker::User;
  std::string text;
  std::string timestamp;
};

struct Round {
  std::string id;
  std::string session_id;
  std::vector<std::string> turn_ids;  // length 1 or 2
};

struct Session {
  std::string id;
  std::vector<std::string> round_ids;
  std::string timestamp;
};

// id format "<turn_id>_<index>", index dense per turn.
struct Sentence {
  std::string id;
  std::string turn_id;
  size_t index = 0;
  std::string text;
};

enum class CorpusOrigin { LongMemEval, LoCoMo, Custom };

enum class Granularity { Turn, Round, Session };

inline const char* granularity_name(Granularity g) {
  switch (g) {
    case Granularity::Turn: return "turn";
    case Granularity::Round: return "round";
    default: return "session";
  }
}

inline char granularity_code(Granularity g) {
  switch (g) {
    case Granularity::Turn: return 'T';
    case Granularity::Round: return 'R';
    default: return 'S';
  }
}

struct ConversationCorpus {
  CorpusOrigin origin = CorpusOrigin::Custom;
  std::vector<Session> sessions;
  std::vector<Round> rounds;
  std::vector<Turn> turns;
  std::vector<Sentence> sentences;

  std::unordered_map<std::string, size_t> session_index;
  std::unordered_map<std::string, size_t> round_index;
  std::unordered_map<std::string, size_t> turn_index;
  std::unordered_map<std::string, size_t> sentence_index;

  bool has_session(const std::string& id) const {
    return session_index.count(id) > 0;
  }

  const Session& session(const std::string& id) const {
    auto it = session_index.find(id);
    if (it == session_index.end()) throw UnknownNode("unknown session: " + id);
    return sessions[it->second];
  }
  const Round& round(const std::string& id) const {
    auto it = round_index.find(id);
    if (it == round_index.end()) throw UnknownNode("unknown round: " + id);
    return rounds[it->second];
  }
  const Turn& turn(const std::string& id) const {
    auto it = turn_index.find(id);
    if (it == turn_index.end()) throw UnknownNode("unknown turn: " + id);
    return turns[it->second];
  }
  const Sentence& sentence(const std::string& id) const {
    auto it = sentence_index.find(id);
    if (it == sentence_index.end()) throw UnknownNode("unknown sentence: " + id);
    return sentences[it->second];
  }

  // Every foreign key must resolve; throws on the first violation.
  void validate() const {
    for (const auto& s : sessions) {
      if (s.round_ids.empty()) throw SchemaError("session without rounds: " + s.id);
      for (const auto& rid : s.round_ids) round(rid);
    }
    for (const auto& r : rounds) {
      session(r.session_id);
      if (r.turn_ids.empty()) throw SchemaError("round without turns: " + r.id);
      for (const auto& tid : r.turn_ids) turn(tid);
    }
    for (const auto& t : turns) {
      session(t.session_id);
      if (trim_copy(t.text).empty()) throw SchemaError("empty turn text: " + t.id);
    }
    for (const auto& c : sentences) turn(c.turn_id);
  }
};

struct RawTurn {
  Speaker speaker = Speaker::User;
  std::string text;
  std::string timestamp;
};

struct DecomposedSession {
  Session session;
  std::vector<Round> rounds;
  std::vector<Turn> turns;
};

// Splits a raw session into rounds and turns. A new round starts at every
// user turn (and at the first turn); a round closes once the assistant has
// replied. Assistant turns with no pending user turn open a round of their
// own. Turns whose text trims to empty are dropped.
inline DecomposedSession decompose_session(const std::vector<RawTurn>& raw_session,
                                           const std::string& session_id,
                                           const std::string& session_timestamp = "") {
  if (raw_session.empty()) {
    throw EmptySession("decompose_session: empty session " + session_id);
  }
  DecomposedSession out;
  out.session.id = session_id;
  out.session.timestamp = session_timestamp;

  bool round_open = false;  // open means a user turn is awaiting a reply
  size_t turn_counter = 0;
  auto new_round = [&]() {
    Round r;
    r.id = session_id + "_r" + std::to_string(out.rounds.size());
    r.session_id = session_id;
    out.rounds.push_back(std::move(r));
    out.session.round_ids.push_back(out.rounds.back().id);
  };

  for (const auto& rt : raw_session) {
    if (trim_copy(rt.text).empty()) continue;
    if (rt.speaker == Speaker::User) {
      new_round();
      round_open = true;
    } else if (!round_open) {
      new_round();
    }
    Turn t;
    t.id = session_id + "_" + std::to_string(turn_counter++);
    t.session_id = session_id;
    t.round_index = out.rounds.size() - 1;
    t.speaker = rt.speaker;
    t.text = rt.text;
    t.timestamp = rt.timestamp;
    out.rounds.back().turn_ids.push_back(t.id);
    out.turns.push_back(std::move(t));
    if (rt.speaker == Speaker::Assistant) round_open = false;
  }
  if (out.turns.empty()) {
    throw EmptySession("decompose_session: no non-empty turns in " + session_id);
  }
  return out;
}

// Deterministic rule-based segmentation of one turn. Sentence ids are
// "<turn_id>_<index>" with a dense index.
inline std::vector<Sentence> segment_turn(const Turn& turn) {
  std::vector<Sentence> out;
  auto pieces = split_sentences(turn.text);
  out.reserve(pieces.size());
  for (size_t j = 0; j < pieces.size(); ++j) {
    Sentence s;
    s.id = turn.id + "_" + std::to_string(j);
    s.turn_id = turn.id;
    s.index = j;
    s.text = std::move(pieces[j]);
    out.push_back(std::move(s));
  }
  return out;
}

// Decomposes, segments and inserts one session into the corpus.
inline void add_session(ConversationCorpus& corpus,
                        const std::vector<RawTurn>& raw_session,
                        const std::string& session_id,
                        const std::string& session_timestamp = "") {
  auto dec = decompose_session(raw_session, session_id, session_timestamp);
  corpus.session_index[dec.session.id] = corpus.sessions.size();
  corpus.sessions.push_back(std::move(dec.session));
  for (auto& r : dec.rounds) {
    corpus.round_index[r.id] = corpus.rounds.size();
    corpus.rounds.push_back(std::move(r));
  }
  for (auto& t : dec.turns) {
    for (auto& sent : segment_turn(t)) {
      corpus.sentence_index[sent.id] = corpus.sentences.size();
      corpus.sentences.push_back(std::move(sent));
    }
    corpus.turn_index[t.id] = corpus.turns.size();
    corpus.turns.push_back(std::move(t));
  }
}

// A raw dialogue unit promoted to a graph/chunk view at one granularity.
struct Chunk {
  std::string id;
  Granularity granularity = Granularity::Session;
  std::string text;
  std::vector<std::string> sentence_ids;
  std::string timestamp;
};

namespace detail {

inline std::string effective_turn_timestamp(const ConversationCorpus& corpus,
                                            const Turn& t) {
  if (!t.timestamp.empty()) return t.timestamp;
  return corpus.session(t.session_id).timestamp;
}

}  // namespace detail

// Chunk views at the requested granularity. Chunk text is the raw dialogue
// text of the unit (no speaker labels), so a one-sentence chunk carries the
// same text as its sentence.
inline std::vector<Chunk> chunks_at(const ConversationCorpus& corpus,
                                    Granularity granularity) {
  // Pre-bucket sentence ids per turn to avoid rescanning.
  std::unordered_map<std::string, std::vector<std::string>> turn_sentences;
  for (const auto& s : corpus.sentences) {
    turn_sentences[s.turn_id].push_back(s.id);
  }

  std::vector<Chunk> chunks;
  if (granularity == Granularity::Turn) {
    chunks.reserve(corpus.turns.size());
    for (const auto& t : corpus.turns) {
      Chunk c;
      c.id = t.id;
      c.granularity = granularity;
      c.text = t.text;
      c.sentence_ids = turn_sentences[t.id];
      c.timestamp = detail::effective_turn_timestamp(corpus, t);
      chunks.push_back(std::move(c));
    }
    return chunks;
  }

  if (granularity == Granularity::Round) {
    chunks.reserve(corpus.rounds.size());
    for (const auto& r : corpus.rounds) {
      Chunk c;
      c.id = r.id;
      c.granularity = granularity;
      for (const auto& tid : r.turn_ids) {
        const Turn& t = corpus.turn(tid);
        if (!c.text.empty()) c.text += " ";
        c.text += t.text;
        if (c.timestamp.empty()) c.timestamp = detail::effective_turn_timestamp(corpus, t);
        auto& ids = turn_sentences[tid];
        c.sentence_ids.insert(c.sentence_ids.end(), ids.begin(), ids.end());
      }
      chunks.push_back(std::move(c));
    }
    return chunks;
  }

  chunks.reserve(corpus.sessions.size());
  for (const auto& s : corpus.sessions) {
    Chunk c;
    c.id = s.id;
    c.granularity = granularity;
    c.timestamp = s.timestamp;
    for (const auto& rid : s.round_ids) {
      for (const auto& tid : corpus.round(rid).turn_ids) {
        const Turn& t = corpus.turn(tid);
        if (!c.text.empty()) c.text += "\n";
        c.text += t.text;
        auto& ids = turn_sentences[tid];
        c.sentence_ids.insert(c.sentence_ids.end(), ids.begin(), ids.end());
      }
    }
    chunks.push_back(std::move(c));
  }
  return chunks;
}

// Speaker-labeled dialogue text of a session, one "ROLE: text" line per
// turn. This is the payload format for the summary and fact prompts.
inline std::string render_dialogue(const ConversationCorpus& corpus,
                                   const Session& session) {
  std::string out;
  for (const auto& rid : session.round_ids) {
    for (const auto& tid : corpus.round(rid).turn_ids) {
      const Turn& t = corpus.turn(tid);
      if (!out.empty()) out += "\n";
      out += speaker_label(t.speaker);
      out += ": ";
      out += t.text;
    }
  }
  return out;
}

// Session id of the unit a chunk id refers to, at any granularity.
inline std::string chunk_session_id(const ConversationCorpus& corpus,
                                    const std::string& chunk_id) {
  if (corpus.session_index.count(chunk_id)) return chunk_id;
  auto rit = corpus.round_index.find(chunk_id);
  if (rit != corpus.round_index.end()) return corpus.rounds[rit->second].session_id;
  auto tit = corpus.turn_index.find(chunk_id);
  if (tit != corpus.turn_index.end()) return corpus.turns[tit->second].session_id;
  throw UnknownNode("chunk id not in corpus: " + chunk_id);
}

}  // namespace sgmem
