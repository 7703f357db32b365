#include "relan/matcher.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <thread>

namespace relan {

namespace {

// Gains at or below this are not improvements; keeps float noise from cycling.
constexpr double kMinGain = 1e-9;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Portable bounded draw (the std distributions are implementation-defined).
std::uint32_t uniform_below(std::mt19937_64& rng, std::uint32_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::uint32_t>(x % bound);
}

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[uniform_below(rng, static_cast<std::uint32_t>(i))]);
    }
}

class WeightTable {
public:
    WeightTable(const Weights& weights) : weights_(weights) {
        unit_ = std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
    }

    double operator()(std::uint64_t mask) const noexcept {
        if (mask == 0) return 0.0;
        if (unit_) return static_cast<double>(std::popcount(mask));
        double s = 0.0;
        while (mask != 0) {
            s += weights_[static_cast<std::size_t>(std::countr_zero(mask))];
            mask &= mask - 1;
        }
        return s;
    }

private:
    const Weights& weights_;
    bool unit_ = true;
};

void check_inputs(const RelationalNetwork& a, const RelationalNetwork& b, const Weights& w) {
    if (a.entity_count() == 0 || b.entity_count() == 0) throw Error("empty network");
    if (!same_registry(a, b)) throw Error("registry mismatch between networks");
    validate_weights(w, a.registry());
}

// Score contributions of source pair (i, k) mapped to target pair (u, v), both directions.
struct PairTerms {
    const RelationalNetwork& a;
    const RelationalNetwork& b;
    WeightTable w;

    double self(std::size_t i, std::size_t u) const noexcept { return w(a.mask(i, i) & b.mask(u, u)); }
    double term(std::size_t i, std::size_t k, std::size_t u, std::size_t v) const noexcept {
        return w(a.mask(i, k) & b.mask(u, v)) + w(a.mask(k, i) & b.mask(v, u));
    }
};

constexpr std::int32_t kFree = -1;

// Steepest-ascent search state. gain_[i][u] holds the score contribution of
// source i if it were mapped to u, counting only the other assigned sources.
class LocalSearch {
public:
    LocalSearch(const RelationalNetwork& a, const RelationalNetwork& b, const Weights& weights)
        : terms_{a, b, WeightTable(weights)}, na_(a.entity_count()), nb_(b.entity_count()),
          gain_(na_ * nb_), fwd_(na_, kFree), bwd_(nb_, kFree) {}

    void reset(std::span<const Assignment::Pair> initial) {
        std::fill(fwd_.begin(), fwd_.end(), kFree);
        std::fill(bwd_.begin(), bwd_.end(), kFree);
        for (std::size_t i = 0; i < na_; ++i) {
            for (std::size_t u = 0; u < nb_; ++u) gain_[i * nb_ + u] = terms_.self(i, u);
        }
        for (const auto& [i, u] : initial) assign(i, u);
    }

    struct Outcome {
        std::uint64_t moves = 0;
        bool cap_hit = false;
    };

    Outcome climb(std::uint32_t max_iters) {
        Outcome out;
        while (true) {
            Move best = best_move();
            if (best.gain <= kMinGain) break;
            if (out.moves == max_iters) {
                out.cap_hit = true;
                break;
            }
            apply(best);
            ++out.moves;
        }
        return out;
    }

    std::vector<Assignment::Pair> pairs() const {
        std::vector<Assignment::Pair> out;
        for (std::size_t i = 0; i < na_; ++i) {
            if (fwd_[i] != kFree) out.emplace_back(i, fwd_[i]);
        }
        return out;
    }

private:
    enum class Kind { Augment, Reassign, Swap };

    struct Move {
        double gain = 0.0;
        std::uint32_t source = 0;  // tie-break key: (source, new target of source)
        std::uint32_t target = 0;
        std::uint32_t other = 0;   // second source for swaps
        Kind kind = Kind::Augment;
    };

    static bool better(const Move& cand, const Move& best) {
        if (cand.gain != best.gain) return cand.gain > best.gain;
        if (cand.source != best.source) return cand.source < best.source;
        return cand.target < best.target;
    }

    double& g(std::size_t i, std::size_t u) { return gain_[i * nb_ + u]; }
    double g(std::size_t i, std::size_t u) const { return gain_[i * nb_ + u]; }

    void assign(std::size_t i, std::size_t u) {
        for (std::uint32_t k : terms_.a.neighbors(i)) {
            double* row = &gain_[k * nb_];
            for (std::size_t v = 0; v < nb_; ++v) row[v] += terms_.term(k, i, v, u);
        }
        fwd_[i] = static_cast<std::int32_t>(u);
        bwd_[u] = static_cast<std::int32_t>(i);
    }

    void unassign(std::size_t i) {
        const auto u = static_cast<std::size_t>(fwd_[i]);
        for (std::uint32_t k : terms_.a.neighbors(i)) {
            double* row = &gain_[k * nb_];
            for (std::size_t v = 0; v < nb_; ++v) row[v] -= terms_.term(k, i, v, u);
        }
        fwd_[i] = kFree;
        bwd_[u] = kFree;
    }

    Move best_move() const {
        Move best;
        best.gain = 0.0;
        bool found = false;
        auto offer = [&](const Move& m) {
            if (!found || better(m, best)) {
                best = m;
                found = true;
            }
        };

        std::vector<std::uint32_t> assigned, free_src, free_tgt;
        for (std::size_t i = 0; i < na_; ++i) {
            (fwd_[i] == kFree ? free_src : assigned).push_back(static_cast<std::uint32_t>(i));
        }
        for (std::size_t u = 0; u < nb_; ++u) {
            if (bwd_[u] == kFree) free_tgt.push_back(static_cast<std::uint32_t>(u));
        }

        for (std::uint32_t i : free_src) {
            for (std::uint32_t u : free_tgt) offer({g(i, u), i, u, 0, Kind::Augment});
        }
        for (std::uint32_t i : assigned) {
            const double current = g(i, static_cast<std::size_t>(fwd_[i]));
            for (std::uint32_t u : free_tgt) offer({g(i, u) - current, i, u, 0, Kind::Reassign});
        }
        for (std::size_t x = 0; x < assigned.size(); ++x) {
            const std::uint32_t i1 = assigned[x];
            const auto u1 = static_cast<std::size_t>(fwd_[i1]);
            for (std::size_t y = x + 1; y < assigned.size(); ++y) {
                const std::uint32_t i2 = assigned[y];
                const auto u2 = static_cast<std::size_t>(fwd_[i2]);
                const double before = g(i1, u1) + g(i2, u2) - terms_.term(i1, i2, u1, u2);
                const double after = g(i1, u2) - terms_.term(i1, i2, u2, u2) + g(i2, u1) -
                                     terms_.term(i2, i1, u1, u1) + terms_.term(i1, i2, u2, u1);
                offer({after - before, i1, static_cast<std::uint32_t>(u2), i2, Kind::Swap});
            }
        }
        return best;
    }

    void apply(const Move& m) {
        switch (m.kind) {
            case Kind::Augment:
                assign(m.source, m.target);
                break;
            case Kind::Reassign:
                unassign(m.source);
                assign(m.source, m.target);
                break;
            case Kind::Swap: {
                const auto u1 = static_cast<std::size_t>(fwd_[m.source]);
                const auto u2 = static_cast<std::size_t>(fwd_[m.other]);
                unassign(m.source);
                unassign(m.other);
                assign(m.source, u2);
                assign(m.other, u1);
                break;
            }
        }
    }

    PairTerms terms_;
    std::size_t na_, nb_;
    std::vector<double> gain_;
    std::vector<std::int32_t> fwd_, bwd_;
};

// Restart 0: pairs ranked by shared per-type degree mass, greedily made injective.
std::vector<Assignment::Pair> greedy_overlap_start(const RelationalNetwork& a, const RelationalNetwork& b) {
    const auto pa = relation_profiles(a);
    const auto pb = relation_profiles(b);
    struct Scored {
        std::uint32_t overlap, i, u;
    };
    std::vector<Scored> all;
    all.reserve(a.entity_count() * b.entity_count());
    for (std::uint32_t i = 0; i < a.entity_count(); ++i) {
        for (std::uint32_t u = 0; u < b.entity_count(); ++u) {
            std::uint32_t ov = 0;
            for (std::size_t t = 0; t < pa[i].per_type.size(); ++t) {
                ov += std::min(pa[i].per_type[t].out, pb[u].per_type[t].out) +
                      std::min(pa[i].per_type[t].in, pb[u].per_type[t].in);
            }
            all.push_back({ov, i, u});
        }
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Scored& x, const Scored& y) { return x.overlap > y.overlap; });
    std::vector<bool> used_a(a.entity_count()), used_b(b.entity_count());
    std::vector<Assignment::Pair> out;
    const std::size_t want = std::min(a.entity_count(), b.entity_count());
    for (const auto& s : all) {
        if (out.size() == want) break;
        if (used_a[s.i] || used_b[s.u]) continue;
        used_a[s.i] = used_b[s.u] = true;
        out.emplace_back(s.i, s.u);
    }
    return out;
}

std::vector<Assignment::Pair> random_start(std::size_t na, std::size_t nb, std::uint64_t seed,
                                           std::uint32_t restart) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(0x5851f42d4c957f2dULL + restart)));
    std::vector<std::uint32_t> src(na), tgt(nb);
    std::iota(src.begin(), src.end(), 0u);
    std::iota(tgt.begin(), tgt.end(), 0u);
    shuffle(src, rng);
    shuffle(tgt, rng);
    std::vector<Assignment::Pair> out;
    for (std::size_t k = 0; k < std::min(na, nb); ++k) out.emplace_back(src[k], tgt[k]);
    return out;
}

}  // namespace

void MatchConfig::validate() const {
    if (restarts == 0) throw Error("restarts must be at least 1");
    if (max_iters_per_restart == 0) throw Error("max_iters_per_restart must be at least 1");
    if (top_k == 0) throw Error("top_k must be at least 1");
}

MatchResult match(const RelationalNetwork& source, const RelationalNetwork& target,
                  const MatchConfig& config) {
    config.validate();
    check_inputs(source, target, config.weights);

    LocalSearch search(source, target, config.weights);
    MatchResult best;
    bool have_best = false;
    for (std::uint32_t r = 0; r < config.restarts; ++r) {
        search.reset(r == 0 ? greedy_overlap_start(source, target)
                            : random_start(source.entity_count(), target.entity_count(), config.seed, r));
        auto outcome = search.climb(config.max_iters_per_restart);
        best.moves += outcome.moves;
        best.iteration_cap_hit = best.iteration_cap_hit || outcome.cap_hit;

        Assignment asg(search.pairs());
        const double raw = relational_score(source, target, asg, config.weights);
        if (!have_best || raw > best.score.raw) {
            best.assignment = std::move(asg);
            best.score = make_score(raw, source.entity_count(), target.entity_count());
            best.best_restart_index = r;
            have_best = true;
        }
    }
    best.restarts_used = config.restarts;
    return best;
}

namespace {

struct Enumerator {
    const PairTerms& terms;
    std::size_t na, nb;
    std::vector<std::uint32_t> image;
    std::vector<bool> used;
    double best = -1.0;
    std::vector<std::uint32_t> best_image;

    void run(std::size_t depth, double partial) {
        if (depth == na) {
            if (partial > best) {
                best = partial;
                best_image = image;
            }
            return;
        }
        for (std::uint32_t u = 0; u < nb; ++u) {
            if (used[u]) continue;
            double add = terms.self(depth, u);
            for (std::size_t k = 0; k < depth; ++k) add += terms.term(depth, k, u, image[k]);
            used[u] = true;
            image[depth] = u;
            run(depth + 1, partial + add);
            used[u] = false;
        }
    }
};

}  // namespace

MatchResult brute_force_match(const RelationalNetwork& source, const RelationalNetwork& target,
                              std::size_t cap, const Weights& weights) {
    check_inputs(source, target, weights);
    const std::size_t smaller = std::min(source.entity_count(), target.entity_count());
    if (smaller > cap) {
        throw Error("brute force refused: min(n_source, n_target) = " + std::to_string(smaller) +
                    " exceeds cap " + std::to_string(cap));
    }
    // Enumerate injections of the smaller side; the score is symmetric under inversion.
    const bool flipped = source.entity_count() > target.entity_count();
    const RelationalNetwork& small = flipped ? target : source;
    const RelationalNetwork& large = flipped ? source : target;
    PairTerms terms{small, large, WeightTable(weights)};
    Enumerator e{terms, small.entity_count(), large.entity_count(),
                 std::vector<std::uint32_t>(small.entity_count()),
                 std::vector<bool>(large.entity_count()), -1.0, {}};
    e.run(0, 0.0);

    std::vector<Assignment::Pair> pairs;
    for (std::uint32_t k = 0; k < e.best_image.size(); ++k) {
        pairs.push_back(flipped ? Assignment::Pair{e.best_image[k], k} : Assignment::Pair{k, e.best_image[k]});
    }
    MatchResult result;
    result.assignment = Assignment(std::move(pairs));
    const double raw = relational_score(source, target, result.assignment, weights);
    result.score = make_score(raw, source.entity_count(), target.entity_count());
    return result;
}

void rank_and_truncate(std::vector<RankedEntry>& entries, std::size_t top_k) {
    std::sort(entries.begin(), entries.end(), [](const RankedEntry& x, const RankedEntry& y) {
        if (x.result.score.normalized != y.result.score.normalized) {
            return x.result.score.normalized > y.result.score.normalized;
        }
        if (x.candidate_id != y.candidate_id) return x.candidate_id < y.candidate_id;
        return x.candidate_index < y.candidate_index;
    });
    if (entries.size() > top_k) entries.resize(top_k);
}

std::vector<RankedAnalogues> batch_match(std::span<const NamedNetwork> queries,
                                         std::span<const NamedNetwork> candidates,
                                         const MatchConfig& config) {
    config.validate();
    const std::size_t nc = candidates.size();
    const std::size_t tasks = queries.size() * nc;
    std::vector<std::optional<MatchResult>> results(tasks);
    std::vector<std::string> failures(tasks);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
            try {
                results[t] = match(queries[t / nc].network, candidates[t % nc].network, config);
            } catch (const std::exception& e) {
                failures[t] = e.what();
            }
        }
    };
    unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(tasks, 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }

    std::vector<RankedAnalogues> out(queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
        out[q].query_id = queries[q].id;
        std::vector<RankedEntry> entries;
        for (std::size_t c = 0; c < nc; ++c) {
            const std::size_t t = q * nc + c;
            if (results[t]) {
                entries.push_back({candidates[c].id, c, std::move(*results[t])});
            } else {
                out[q].errors.push_back({queries[q].id, candidates[c].id, failures[t]});
            }
        }
        rank_and_truncate(entries, config.top_k);
        out[q].ranking = std::move(entries);
    }
    return out;
}

std::vector<std::size_t> prefilter_candidates(const RelationalNetwork& query,
                                              std::span<const NamedNetwork> candidates,
                                              std::size_t budget) {
    if (budget == 0) throw Error("prefilter budget must be at least 1");
    auto signatures = [](const RelationalNetwork& n) {
        std::map<std::uint64_t, std::size_t> counts;
        for (const auto& p : relation_profiles(n)) {
            const auto h = signature_hash(p);
            if (h != kEmptyProfileHash) ++counts[h];  // isolated entities carry no structure
        }
        return counts;
    };
    const auto qsig = signatures(query);

    struct Ranked {
        std::size_t overlap, size_diff, index;
    };
    std::vector<Ranked> ranked;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const auto csig = signatures(candidates[c].network);
        std::size_t overlap = 0;
        for (const auto& [h, n] : qsig) {
            auto it = csig.find(h);
            if (it != csig.end()) overlap += std::min(n, it->second);
        }
        const std::size_t nq = query.entity_count(), nn = candidates[c].network.entity_count();
        ranked.push_back({overlap, nq > nn ? nq - nn : nn - nq, c});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
        if (x.overlap != y.overlap) return x.overlap > y.overlap;
        if (x.size_diff != y.size_diff) return x.size_diff < y.size_diff;
        return x.index < y.index;
    });
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < std::min(budget, ranked.size()); ++k) out.push_back(ranked[k].index);
    return out;
}

}  // namespace relan
