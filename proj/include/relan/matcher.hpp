#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relan/relnet.hpp"

namespace relan {

struct MatchConfig {
    std::uint32_t restarts = 32;
    std::uint32_t max_iters_per_restart = 1000;
    std::uint64_t seed = 42;
    Weights weights;  // empty: unit weight per relation type
    std::uint32_t top_k = 5;
    std::size_t brute_force_cap = 8;
    unsigned threads = 0;  // batch workers; 0 picks hardware concurrency

    void validate() const;  // throws Error when a count is zero
};

struct MatchResult {
    Assignment assignment;
    MatchScore score;
    std::uint32_t restarts_used = 0;
    std::uint32_t best_restart_index = 0;
    // True when some restart stopped at max_iters_per_restart with an improving move left.
    bool iteration_cap_hit = false;
    std::uint64_t moves = 0;  // accepted moves summed over restarts
};

// Multi-restart steepest-ascent augment/swap local search. Deterministic in
// (source, target, config.seed).
MatchResult match(const RelationalNetwork& source, const RelationalNetwork& target,
                  const MatchConfig& config = {});

// Exact optimum by enumeration of maximal injective assignments.
// Refuses when min(n_source, n_target) exceeds `cap`.
MatchResult brute_force_match(const RelationalNetwork& source, const RelationalNetwork& target,
                              std::size_t cap = 8, const Weights& weights = {});

struct RankedEntry {
    std::string candidate_id;
    std::size_t candidate_index = 0;
    MatchResult result;
};

struct PairError {
    std::string query_id;
    std::string candidate_id;
    std::string message;
};

struct RankedAnalogues {
    std::string query_id;
    std::vector<RankedEntry> ranking;  // non-increasing normalized score, ties by candidate id
    std::vector<PairError> errors;
};

// Orders entries by normalized score descending, then candidate id ascending,
// and truncates to top_k.
void rank_and_truncate(std::vector<RankedEntry>& entries, std::size_t top_k);

// Every query against every candidate. Pairs are independent tasks and may run
// on several threads; results do not depend on scheduling.
std::vector<RankedAnalogues> batch_match(std::span<const NamedNetwork> queries,
                                         std::span<const NamedNetwork> candidates,
                                         const MatchConfig& config = {});

// Indices of the `budget` candidates whose multiset of relation-profile
// signatures overlaps the query's most (isolated entities are ignored). Order: overlap desc, entity-count
// difference asc, index asc.
std::vector<std::size_t> prefilter_candidates(const RelationalNetwork& query,
                                              std::span<const NamedNetwork> candidates,
                                              std::size_t budget);

}  // namespace relan
