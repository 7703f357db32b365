#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "relan/leanstates.hpp"

namespace relan::stats {

using lean::TacticSchema;

struct AreaTally {
    std::uint64_t total = 0;
    std::map<TacticSchema, std::uint64_t> counts;
};

struct ExclusionTallies {
    std::uint64_t included = 0;
    std::uint64_t no_source = 0;     // entry lacks source_file
    std::uint64_t non_area_path = 0; // source_file with fewer than two components
    std::uint64_t shortcut = 0;
    std::uint64_t unparseable = 0;

    std::uint64_t sum() const { return included + no_source + non_area_path + shortcut + unparseable; }
};

// Per-area schema counts. f(a, s) = count(a, s) / total(a).
struct AreaStats {
    std::map<std::string, AreaTally> areas;
    ExclusionTallies tallies;
    std::uint64_t corpus_size = 0;

    double frequency(const std::string& area, const TacticSchema& s) const;
    std::uint64_t count(const std::string& area, const TacticSchema& s) const;
    std::set<TacticSchema> schemas() const;
    std::vector<std::string> area_names() const;
};

AreaStats aggregate(std::span<const lean::CorpusEntry> entries,
                    const lean::HeadList& known = lean::HeadList::known_tactics());

struct SchemaColumn {
    TacticSchema schema;
    std::vector<double> freq;  // indexed like ZTable::areas, zeros where absent
    std::vector<double> z;
    std::vector<std::uint64_t> count;
    double mean = 0.0;
    double stddev = 0.0;  // population
    std::size_t areas_present = 0;
    bool degenerate = false;  // stddev == 0; all z are 0
};

struct ZTable {
    std::vector<std::string> areas;     // the universe, sorted
    std::vector<SchemaColumn> columns;  // sorted by schema

    std::optional<std::size_t> area_index(const std::string& area) const;
    const SchemaColumn* column(const TacticSchema& s) const;
};

// Frequencies over the whole universe (implicit zeros), population mean and
// standard deviation, z per (area, schema).
ZTable zscore_table(const AreaStats& stats, std::span<const std::string> universe);

struct TransferFilters {
    std::set<std::string> excluded_sources{"Mathlib.CategoryTheory"};
    std::set<std::string> excluded_targets{"Mathlib.Tactic", "Mathlib.Control", "Mathlib.Logic"};
    std::set<std::string> shortcut_heads;  // extra heads never treated as transferable
    std::size_t min_areas_present = 3;
    double z_source_min = 2.0;
    double z_target_max = -1.0;
};

// z comparisons are inclusive up to this slack, absorbing rounding in mean/stddev.
inline constexpr double kZTolerance = 1e-9;

struct TransferCandidate {
    TacticSchema schema;
    std::string source;
    std::string target;
    double z_source = 0.0;
    double z_target = 0.0;       // computed with f(T, s) = 0 when absent
    bool target_absent = false;  // count(T, s) == 0
    double gap = 0.0;            // z_source - z_target
    std::uint64_t source_count = 0;
};

// Throws when S == T, either area is outside the universe, or S/T is excluded.
// Result is sorted by gap descending, then schema.
std::vector<TransferCandidate> transfer_candidates(const ZTable& table, const std::string& source,
                                                   const std::string& target, const TransferFilters& filters = {});

struct PairScore {
    std::string source;
    std::string target;
    double potential = 0.0;
    std::vector<TransferCandidate> contributors;  // top gaps, at most 10
};

inline constexpr std::size_t kPairTopGaps = 10;

// Sum over the top-10 gaps of gap * log(1 + source_count).
double potential_of(std::span<const TransferCandidate> by_gap_desc);

// Every admissible ordered pair, ranked by potential descending then (source, target).
std::vector<PairScore> pair_potential(const ZTable& table, const TransferFilters& filters = {});

// Tab-separated reports with header rows.
void write_zscores_tsv(std::ostream& out, const ZTable& table);
void write_candidates_tsv(std::ostream& out, std::span<const TransferCandidate> candidates);
void write_pairs_tsv(std::ostream& out, std::span<const PairScore> pairs);
void write_census_tsv(std::ostream& out, const AreaStats& stats);

std::string format_number(double v);

}  // namespace relan::stats
