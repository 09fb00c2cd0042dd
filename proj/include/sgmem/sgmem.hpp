#pragma once

// Umbrella header for the sentence-graph conversational memory engine.

#include "sgmem/bm25.hpp"
#include "sgmem/conversation.hpp"
#include "sgmem/dataset.hpp"
#include "sgmem/embedding.hpp"
#include "sgmem/errors.hpp"
#include "sgmem/index_store.hpp"
#include "sgmem/llm.hpp"
#include "sgmem/memory_generation.hpp"
#include "sgmem/prompts.hpp"
#include "sgmem/qa.hpp"
#include "sgmem/retrieval.hpp"
#include "sgmem/segmentation.hpp"
#include "sgmem/sentence_graph.hpp"
#include "sgmem/serialization.hpp"
