#include "relan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace relan::stats {

double AreaStats::frequency(const std::string& area, const TacticSchema& s) const {
    auto it = areas.find(area);
    if (it == areas.end() || it->second.total == 0) return 0.0;
    return static_cast<double>(count(area, s)) / static_cast<double>(it->second.total);
}

std::uint64_t AreaStats::count(const std::string& area, const TacticSchema& s) const {
    auto it = areas.find(area);
    if (it == areas.end()) return 0;
    auto c = it->second.counts.find(s);
    return c == it->second.counts.end() ? 0 : c->second;
}

std::set<TacticSchema> AreaStats::schemas() const {
    std::set<TacticSchema> out;
    for (const auto& [_, tally] : areas) {
        for (const auto& [s, _c] : tally.counts) out.insert(s);
    }
    return out;
}

std::vector<std::string> AreaStats::area_names() const {
    std::vector<std::string> out;
    for (const auto& [a, _] : areas) out.push_back(a);
    return out;
}

AreaStats aggregate(std::span<const lean::CorpusEntry> entries, const lean::HeadList& known) {
    AreaStats stats;
    stats.corpus_size = entries.size();
    for (const auto& e : entries) {
        if (!e.source_file) {
            ++stats.tallies.no_source;
            continue;
        }
        std::string area;
        try {
            area = lean::derive_area(*e.source_file);
        } catch (const Error&) {
            ++stats.tallies.non_area_path;
            continue;
        }
        const auto parsed = lean::parse_schema(e.tactic, known);
        if (parsed.kind == lean::SchemaClass::Shortcut) {
            ++stats.tallies.shortcut;
            continue;
        }
        if (parsed.kind == lean::SchemaClass::Unparseable) {
            ++stats.tallies.unparseable;
            continue;
        }
        auto& tally = stats.areas[area];
        ++tally.total;
        ++tally.counts[parsed.schema];
        ++stats.tallies.included;
    }
    return stats;
}

std::optional<std::size_t> ZTable::area_index(const std::string& area) const {
    auto it = std::lower_bound(areas.begin(), areas.end(), area);
    if (it == areas.end() || *it != area) return std::nullopt;
    return static_cast<std::size_t>(it - areas.begin());
}

const SchemaColumn* ZTable::column(const TacticSchema& s) const {
    auto it = std::lower_bound(columns.begin(), columns.end(), s,
                               [](const SchemaColumn& c, const TacticSchema& key) { return c.schema < key; });
    if (it == columns.end() || it->schema != s) return nullptr;
    return &*it;
}

ZTable zscore_table(const AreaStats& stats, std::span<const std::string> universe) {
    if (universe.empty()) throw Error("area universe is empty");
    ZTable table;
    table.areas.assign(universe.begin(), universe.end());
    std::sort(table.areas.begin(), table.areas.end());
    table.areas.erase(std::unique(table.areas.begin(), table.areas.end()), table.areas.end());
    for (const auto& [area, _] : stats.areas) {
        if (!table.area_index(area)) throw Error("area universe is missing observed area " + area);
    }

    const std::size_t n = table.areas.size();
    for (const auto& schema : stats.schemas()) {
        SchemaColumn col;
        col.schema = schema;
        col.freq.resize(n);
        col.count.resize(n);
        col.z.assign(n, 0.0);
        for (std::size_t a = 0; a < n; ++a) {
            col.count[a] = stats.count(table.areas[a], schema);
            col.freq[a] = stats.frequency(table.areas[a], schema);
            if (col.count[a] > 0) ++col.areas_present;
        }
        double sum = 0.0;
        for (double f : col.freq) sum += f;
        col.mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (double f : col.freq) ss += (f - col.mean) * (f - col.mean);
        col.stddev = std::sqrt(ss / static_cast<double>(n));
        col.degenerate = !(col.stddev > 0.0);
        if (!col.degenerate) {
            for (std::size_t a = 0; a < n; ++a) col.z[a] = (col.freq[a] - col.mean) / col.stddev;
        }
        table.columns.push_back(std::move(col));
    }
    return table;
}

namespace {

void check_pair(const ZTable& table, const std::string& source, const std::string& target,
                const TransferFilters& filters) {
    if (source == target) throw Error("source and target area must differ (" + source + ")");
    if (!table.area_index(source)) throw Error("source area " + source + " is not in the area universe");
    if (!table.area_index(target)) throw Error("target area " + target + " is not in the area universe");
    if (filters.excluded_sources.count(source)) {
        throw Error("source area " + source + " rejected by rule excluded-source-area");
    }
    if (filters.excluded_targets.count(target)) {
        throw Error("target area " + target + " rejected by rule excluded-target-area");
    }
}

std::vector<TransferCandidate> candidates_unchecked(const ZTable& table, std::size_t s, std::size_t t,
                                                    const TransferFilters& filters) {
    std::vector<TransferCandidate> out;
    for (const auto& col : table.columns) {
        if (col.degenerate || col.areas_present < filters.min_areas_present) continue;
        if (filters.shortcut_heads.count(col.schema.head)) continue;
        const bool absent = col.count[t] == 0;
        if (col.z[s] < filters.z_source_min - kZTolerance) continue;
        if (!absent && col.z[t] > filters.z_target_max + kZTolerance) continue;
        out.push_back({col.schema, table.areas[s], table.areas[t], col.z[s], col.z[t], absent, col.z[s] - col.z[t],
                       col.count[s]});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const TransferCandidate& a, const TransferCandidate& b) { return a.gap > b.gap; });
    return out;
}

}  // namespace

std::vector<TransferCandidate> transfer_candidates(const ZTable& table, const std::string& source,
                                                   const std::string& target, const TransferFilters& filters) {
    check_pair(table, source, target, filters);
    return candidates_unchecked(table, *table.area_index(source), *table.area_index(target), filters);
}

double potential_of(std::span<const TransferCandidate> by_gap_desc) {
    double p = 0.0;
    for (std::size_t k = 0; k < std::min(kPairTopGaps, by_gap_desc.size()); ++k) {
        p += by_gap_desc[k].gap * std::log1p(static_cast<double>(by_gap_desc[k].source_count));
    }
    return p;
}

std::vector<PairScore> pair_potential(const ZTable& table, const TransferFilters& filters) {
    std::vector<PairScore> out;
    for (std::size_t s = 0; s < table.areas.size(); ++s) {
        if (filters.excluded_sources.count(table.areas[s])) continue;
        for (std::size_t t = 0; t < table.areas.size(); ++t) {
            if (s == t || filters.excluded_targets.count(table.areas[t])) continue;
            auto cands = candidates_unchecked(table, s, t, filters);
            if (cands.size() > kPairTopGaps) cands.resize(kPairTopGaps);
            const double p = potential_of(cands);
            out.push_back({table.areas[s], table.areas[t], p, std::move(cands)});
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const PairScore& a, const PairScore& b) { return a.potential > b.potential; });
    return out;
}

std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_zscores_tsv(std::ostream& out, const ZTable& table) {
    out << "area\tschema\tcount\tfreq\tz\n";
    for (std::size_t a = 0; a < table.areas.size(); ++a) {
        for (const auto& col : table.columns) {
            out << table.areas[a] << '\t' << col.schema.key() << '\t' << col.count[a] << '\t'
                << format_number(col.freq[a]) << '\t' << format_number(col.z[a]) << '\n';
        }
    }
}

void write_candidates_tsv(std::ostream& out, std::span<const TransferCandidate> candidates) {
    out << "schema\tsource\ttarget\tz_source\tz_target\tgap\tsource_count\n";
    for (const auto& c : candidates) {
        out << c.schema.key() << '\t' << c.source << '\t' << c.target << '\t' << format_number(c.z_source) << '\t'
            << (c.target_absent ? std::string("ABSENT") : format_number(c.z_target)) << '\t' << format_number(c.gap)
            << '\t' << c.source_count << '\n';
    }
}

void write_pairs_tsv(std::ostream& out, std::span<const PairScore> pairs) {
    out << "source\ttarget\tpotential\tcandidates\tschemas\n";
    for (const auto& p : pairs) {
        out << p.source << '\t' << p.target << '\t' << format_number(p.potential) << '\t' << p.contributors.size()
            << '\t';
        for (std::size_t k = 0; k < p.contributors.size(); ++k) {
            out << (k ? "," : "") << p.contributors[k].schema.key();
        }
        out << '\n';
    }
}

void write_census_tsv(std::ostream& out, const AreaStats& stats) {
    out << "schema\ttotal\tareas_present\n";
    for (const auto& s : stats.schemas()) {
        std::uint64_t total = 0, present = 0;
        for (const auto& [area, tally] : stats.areas) {
            auto it = tally.counts.find(s);
            if (it != tally.counts.end() && it->second > 0) {
                total += it->second;
                ++present;
            }
        }
        out << s.key() << '\t' << total << '\t' << present << '\n';
    }
    const auto& t = stats.tallies;
    out << "# corpus_size\t" << stats.corpus_size << '\n'
        << "# included\t" << t.included << '\n'
        << "# excluded_no_source\t" << t.no_source << '\n'
        << "# excluded_non_area_path\t" << t.non_area_path << '\n'
        << "# excluded_shortcut\t" << t.shortcut << '\n'
        << "# excluded_unparseable\t" << t.unparseable << '\n'
        << "# distinct_schemas\t" << stats.schemas().size() << '\n'
        << "# areas\t" << stats.areas.size() << '\n';
}

}  // namespace relan::stats
